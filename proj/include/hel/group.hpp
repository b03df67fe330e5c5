#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hel {

/// Element of one of the discrete groups below; unused coordinates are zero.
struct GroupElement {
    std::array<std::int64_t, 3> c{};

    friend bool operator==(const GroupElement&, const GroupElement&) = default;
    friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

struct GroupElementHash {
    std::size_t operator()(const GroupElement& g) const noexcept;
};

enum class GroupKind { integers, integer_lattice, cyclic, heisenberg };

/*
 * Countable discrete amenable groups with counting Haar measure.
 *   integers          Z
 *   integer_lattice   Z^d, d <= 3
 *   cyclic            Z / NZ, elements reduced to [0, N)
 *   heisenberg        integer 3x3 upper unitriangular matrices,
 *                     (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')
 * Coordinates are limited to |x| <= 2^40 so products never overflow.
 */
class Group {
public:
    static Group integers();
    static Group lattice(std::size_t dim);
    static Group cyclic(std::int64_t order);
    static Group heisenberg();

    GroupKind kind() const noexcept { return kind_; }
    /// Number of meaningful coordinates.
    std::size_t rank() const noexcept { return rank_; }
    std::int64_t order() const noexcept { return order_; }  // 0 for infinite groups
    bool is_abelian() const noexcept { return kind_ != GroupKind::heisenberg; }
    /// Z or Z^d, where finite sets can be handled as integer boxes.
    bool is_free_abelian() const noexcept {
        return kind_ == GroupKind::integers || kind_ == GroupKind::integer_lattice;
    }

    GroupElement identity() const { return {}; }
    /// Builds an element from coordinates, reducing modulo the order for cyclic groups.
    GroupElement element(std::initializer_list<std::int64_t> coords) const;
    GroupElement normalize(GroupElement g) const;
    GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
    GroupElement inverse(const GroupElement& a) const;
    std::vector<GroupElement> generators() const;

    /// Throws DomainError when g is not a valid element (bounds, unused coordinates).
    void check(const GroupElement& g) const;

    std::string describe() const;

    friend bool operator==(const Group&, const Group&) = default;

private:
    Group(GroupKind k, std::size_t rank, std::int64_t order) : kind_(k), rank_(rank), order_(order) {}
    GroupKind kind_;
    std::size_t rank_;
    std::int64_t order_;
};

/// Half-open integer box [lo, hi) in the first `rank` coordinates.
struct IntBox {
    std::array<std::int64_t, 3> lo{};
    std::array<std::int64_t, 3> hi{};
    std::size_t rank = 1;

    std::size_t volume() const;
    bool contains(const IntBox& other) const;
};

enum class FolnerFamily { interval, box, custom };

/*
 * n -> F_n, a finite nonempty subset of the group (n >= 1).
 *   interval   {0, ..., n-1} in Z; {0, ..., min(n, N)-1} in Z/NZ
 *   box        [0, n)^d in Z^d; [0,n) x [0,n) x [0,n^2) in the Heisenberg group
 *   custom     explicit list of sets; F_n defined for n up to the list length
 */
class FolnerSequence {
public:
    static FolnerSequence interval(Group g);
    static FolnerSequence box(Group g);
    static FolnerSequence custom(Group g, std::vector<std::vector<GroupElement>> sets, std::string label = "custom");

    const Group& group() const noexcept { return group_; }
    FolnerFamily family() const noexcept { return family_; }
    const std::string& label() const noexcept { return label_; }

    /// Sorted, duplicate-free elements of F_n.
    std::vector<GroupElement> set(std::size_t n) const;
    std::size_t size(std::size_t n) const;
    /// F_n as an integer box when the group is Z or Z^d and F_n is one.
    std::optional<IntBox> as_box(std::size_t n) const;
    /// Largest valid index for custom families.
    std::optional<std::size_t> length() const;
    /// True when F_1 ⊆ F_2 ⊆ ... by construction.
    bool nested() const noexcept { return family_ != FolnerFamily::custom; }

    /// Calls visit(g) for each g in F_n (same order as set(n)) without materialising boxes.
    void for_each(std::size_t n, const std::function<void(const GroupElement&)>& visit) const;

    const std::vector<std::vector<GroupElement>>& custom_sets() const noexcept { return custom_; }

private:
    FolnerSequence(Group g, FolnerFamily f, std::string label) : group_(g), family_(f), label_(std::move(label)) {}
    void check_index(std::size_t n) const;

    Group group_;
    FolnerFamily family_;
    std::string label_;
    std::vector<std::vector<GroupElement>> custom_;
    std::vector<std::optional<IntBox>> custom_boxes_;
};

/// |g F_n Δ F_n| / |F_n|, in [0, 2].
double folner_defect(const FolnerSequence& seq, const GroupElement& g, std::size_t n);

inline constexpr std::size_t kDefaultEnumerationCap = 50'000'000;

/// |⋃_{k<n} F_k^{-1} F_n| / |F_n|; 0 for n = 1. Exact; box arithmetic when possible,
/// otherwise set enumeration limited to `cap` products (CapacityError beyond).
double shulman_ratio(const FolnerSequence& seq, std::size_t n, std::size_t cap = kDefaultEnumerationCap);

struct TemperedReport {
    double max_ratio = 0.0;
    std::size_t argmax = 1;
    double bound = 0.0;
    bool is_tempered = true;
    std::vector<double> ratios;  // ratios[n-1] = shulman_ratio(seq, n)
};

TemperedReport tempered_report(const FolnerSequence& seq, std::size_t horizon, double bound,
                               std::size_t cap = kDefaultEnumerationCap);

}  // namespace hel
