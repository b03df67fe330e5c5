#pragma once

#include <cstdint>
#include <ostream>

namespace hel::tools {

/// Randomised property suites at desk scale; one line per suite. True when all hold.
bool run_selftest(std::uint64_t seed, std::size_t scale, std::ostream& out);

}  // namespace hel::tools
