#include "hel/group.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "hel/errors.hpp"
#include "hel/random.hpp"

namespace hel {

namespace {

constexpr std::int64_t kCoordLimit = std::int64_t{1} << 40;

std::int64_t mod(std::int64_t a, std::int64_t n) {
    const std::int64_t r = a % n;
    return r < 0 ? r + n : r;
}

}  // namespace

std::size_t GroupElementHash::operator()(const GroupElement& g) const noexcept {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (const auto x : g.c) h = splitmix64(h ^ static_cast<std::uint64_t>(x));
    return static_cast<std::size_t>(h);
}

Group Group::integers() { return Group(GroupKind::integers, 1, 0); }

Group Group::lattice(std::size_t dim) {
    if (dim == 0 || dim > 3) throw DomainError("lattice dimension must be 1, 2 or 3");
    return Group(GroupKind::integer_lattice, dim, 0);
}

Group Group::cyclic(std::int64_t order) {
    if (order < 1 || order > kCoordLimit) throw DomainError("cyclic group order out of range");
    return Group(GroupKind::cyclic, 1, order);
}

Group Group::heisenberg() { return Group(GroupKind::heisenberg, 3, 0); }

GroupElement Group::element(std::initializer_list<std::int64_t> coords) const {
    if (coords.size() != rank_) throw DomainError("group element has wrong number of coordinates");
    GroupElement g;
    std::copy(coords.begin(), coords.end(), g.c.begin());
    return normalize(g);
}

GroupElement Group::normalize(GroupElement g) const {
    if (kind_ == GroupKind::cyclic) g.c[0] = mod(g.c[0], order_);
    check(g);
    return g;
}

void Group::check(const GroupElement& g) const {
    for (std::size_t i = 0; i < 3; ++i) {
        if (i >= rank_ && g.c[i] != 0) throw DomainError("group element uses a coordinate outside the group rank");
        if (g.c[i] > kCoordLimit || g.c[i] < -kCoordLimit) throw DomainError("group element coordinate exceeds 2^40");
    }
    if (kind_ == GroupKind::cyclic && (g.c[0] < 0 || g.c[0] >= order_))
        throw DomainError("cyclic group element not reduced");
}

GroupElement Group::multiply(const GroupElement& a, const GroupElement& b) const {
    GroupElement r;
    switch (kind_) {
        case GroupKind::cyclic:
            r.c[0] = mod(a.c[0] + b.c[0], order_);
            return r;
        case GroupKind::heisenberg:
            r.c = {a.c[0] + b.c[0], a.c[1] + b.c[1], a.c[2] + b.c[2] + a.c[0] * b.c[1]};
            return r;
        default:
            for (std::size_t i = 0; i < 3; ++i) r.c[i] = a.c[i] + b.c[i];
            return r;
    }
}

GroupElement Group::inverse(const GroupElement& a) const {
    GroupElement r;
    switch (kind_) {
        case GroupKind::cyclic:
            r.c[0] = mod(-a.c[0], order_);
            return r;
        case GroupKind::heisenberg:
            r.c = {-a.c[0], -a.c[1], -a.c[2] + a.c[0] * a.c[1]};
            return r;
        default:
            for (std::size_t i = 0; i < 3; ++i) r.c[i] = -a.c[i];
            return r;
    }
}

std::vector<GroupElement> Group::generators() const {
    std::vector<GroupElement> gens;
    if (kind_ == GroupKind::heisenberg) {
        gens.push_back({{1, 0, 0}});
        gens.push_back({{0, 1, 0}});
        return gens;
    }
    for (std::size_t i = 0; i < rank_; ++i) {
        GroupElement g;
        g.c[i] = 1;
        gens.push_back(normalize(g));
    }
    return gens;
}

std::string Group::describe() const {
    switch (kind_) {
        case GroupKind::integers:
            return "Z";
        case GroupKind::integer_lattice:
            return "Z^" + std::to_string(rank_);
        case GroupKind::cyclic:
            return "Z/" + std::to_string(order_) + "Z";
        case GroupKind::heisenberg:
            return "H3(Z)";
    }
    return "?";
}

std::size_t IntBox::volume() const {
    std::size_t v = 1;
    for (std::size_t i = 0; i < rank; ++i) v *= static_cast<std::size_t>(std::max<std::int64_t>(0, hi[i] - lo[i]));
    return v;
}

bool IntBox::contains(const IntBox& o) const {
    for (std::size_t i = 0; i < rank; ++i)
        if (o.lo[i] < lo[i] || o.hi[i] > hi[i]) return false;
    return true;
}

// ---------------------------------------------------------------------------

FolnerSequence FolnerSequence::interval(Group g) {
    if (g.kind() == GroupKind::heisenberg || g.rank() != 1)
        throw DomainError("interval family needs Z, Z^1 or a cyclic group; use box for " + g.describe());
    return FolnerSequence(g, FolnerFamily::interval, "interval");
}

FolnerSequence FolnerSequence::box(Group g) { return FolnerSequence(g, FolnerFamily::box, "box"); }

FolnerSequence FolnerSequence::custom(Group g, std::vector<std::vector<GroupElement>> sets, std::string label) {
    if (sets.empty()) throw DomainError("custom Folner family needs at least one set");
    FolnerSequence seq(g, FolnerFamily::custom, std::move(label));
    for (auto& s : sets) {
        if (s.empty()) throw DomainError("Folner sets must be nonempty");
        for (auto& e : s) e = g.normalize(e);
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        std::optional<IntBox> box;
        if (g.is_free_abelian()) {
            IntBox b;
            b.rank = g.rank();
            for (std::size_t i = 0; i < b.rank; ++i) {
                b.lo[i] = s.front().c[i];
                b.hi[i] = s.front().c[i] + 1;
            }
            for (const auto& e : s)
                for (std::size_t i = 0; i < b.rank; ++i) {
                    b.lo[i] = std::min(b.lo[i], e.c[i]);
                    b.hi[i] = std::max(b.hi[i], e.c[i] + 1);
                }
            if (b.volume() == s.size()) box = b;
        }
        seq.custom_boxes_.push_back(box);
    }
    seq.custom_ = std::move(sets);
    return seq;
}

void FolnerSequence::check_index(std::size_t n) const {
    if (n == 0) throw DomainError("Folner index starts at 1");
    if (family_ == FolnerFamily::custom && n > custom_.size())
        throw DomainError("Folner index " + std::to_string(n) + " beyond custom family length " +
                          std::to_string(custom_.size()));
    if (family_ != FolnerFamily::custom && n > static_cast<std::size_t>(kCoordLimit >> 20))
        throw DomainError("Folner index too large");
}

std::optional<std::size_t> FolnerSequence::length() const {
    if (family_ == FolnerFamily::custom) return custom_.size();
    return std::nullopt;
}

std::optional<IntBox> FolnerSequence::as_box(std::size_t n) const {
    check_index(n);
    if (!group_.is_free_abelian()) return std::nullopt;
    if (family_ == FolnerFamily::custom) return custom_boxes_[n - 1];
    IntBox b;
    b.rank = group_.rank();
    for (std::size_t i = 0; i < b.rank; ++i) b.hi[i] = static_cast<std::int64_t>(n);
    return b;
}

void FolnerSequence::for_each(std::size_t n, const std::function<void(const GroupElement&)>& visit) const {
    check_index(n);
    if (family_ == FolnerFamily::custom) {
        for (const auto& g : custom_[n - 1]) visit(g);
        return;
    }
    const auto m = static_cast<std::int64_t>(n);
    GroupElement g;
    switch (group_.kind()) {
        case GroupKind::cyclic:
            for (std::int64_t i = 0; i < std::min(m, group_.order()); ++i) {
                g.c[0] = i;
                visit(g);
            }
            return;
        case GroupKind::heisenberg:
            for (std::int64_t a = 0; a < m; ++a)
                for (std::int64_t b = 0; b < m; ++b)
                    for (std::int64_t c = 0; c < m * m; ++c) {
                        g.c = {a, b, c};
                        visit(g);
                    }
            return;
        default: {
            const std::size_t d = group_.rank();
            const std::int64_t e1 = d > 1 ? m : 1, e2 = d > 2 ? m : 1;
            for (std::int64_t a = 0; a < m; ++a)
                for (std::int64_t b = 0; b < e1; ++b)
                    for (std::int64_t c = 0; c < e2; ++c) {
                        g.c = {a, d > 1 ? b : 0, d > 2 ? c : 0};
                        visit(g);
                    }
            return;
        }
    }
}

std::vector<GroupElement> FolnerSequence::set(std::size_t n) const {
    std::vector<GroupElement> out;
    out.reserve(size(n));
    for_each(n, [&](const GroupElement& g) { out.push_back(g); });
    return out;
}

std::size_t FolnerSequence::size(std::size_t n) const {
    check_index(n);
    if (family_ == FolnerFamily::custom) return custom_[n - 1].size();
    switch (group_.kind()) {
        case GroupKind::cyclic:
            return std::min<std::size_t>(n, static_cast<std::size_t>(group_.order()));
        case GroupKind::heisenberg:
            return n * n * n * n;
        default: {
            std::size_t v = 1;
            for (std::size_t i = 0; i < group_.rank(); ++i) v *= n;
            return v;
        }
    }
}

// ---------------------------------------------------------------------------

double folner_defect(const FolnerSequence& seq, const GroupElement& g0, std::size_t n) {
    const Group& grp = seq.group();
    const GroupElement g = grp.normalize(g0);
    const double size = static_cast<double>(seq.size(n));
    if (const auto box = seq.as_box(n)) {
        std::size_t overlap = 1;
        for (std::size_t i = 0; i < box->rank; ++i) {
            const std::int64_t len = box->hi[i] - box->lo[i];
            overlap *= static_cast<std::size_t>(std::max<std::int64_t>(0, len - std::abs(g.c[i])));
        }
        return 2.0 * (size - static_cast<double>(overlap)) / size;
    }
    const auto s = seq.set(n);
    std::size_t outside = 0;
    for (const auto& f : s)
        if (!std::binary_search(s.begin(), s.end(), grp.multiply(g, f))) ++outside;
    return 2.0 * static_cast<double>(outside) / size;
}

namespace {

std::optional<double> shulman_by_boxes(const FolnerSequence& seq, std::size_t n) {
    if (!seq.group().is_free_abelian()) return std::nullopt;
    const auto target = seq.as_box(n);
    if (!target) return std::nullopt;
    std::optional<IntBox> largest;
    const std::size_t first = seq.nested() ? n - 1 : 1;
    std::vector<IntBox> boxes;
    for (std::size_t k = first; k < n; ++k) {
        auto b = seq.as_box(k);
        if (!b) return std::nullopt;
        if (!largest || b->volume() > largest->volume()) largest = b;
        boxes.push_back(*b);
    }
    for (const auto& b : boxes)
        if (!largest->contains(b)) return std::nullopt;
    // -[lo, hi) = [1-hi, 1-lo); [a,b) + [c,d) = [a+c, b+d-1).
    double count = 1.0;
    for (std::size_t i = 0; i < target->rank; ++i) {
        const std::int64_t a = 1 - largest->hi[i], b = 1 - largest->lo[i];
        count *= static_cast<double>((b + target->hi[i] - 1) - (a + target->lo[i]));
    }
    return count / static_cast<double>(target->volume());
}

}  // namespace

double shulman_ratio(const FolnerSequence& seq, std::size_t n, std::size_t cap) {
    const std::size_t fn = seq.size(n);
    if (n == 1) return 0.0;
    if (const auto r = shulman_by_boxes(seq, n)) return *r;

    const Group& grp = seq.group();
    std::unordered_set<GroupElement, GroupElementHash> inverses;
    const std::size_t first = seq.nested() ? n - 1 : 1;
    for (std::size_t k = first; k < n; ++k)
        seq.for_each(k, [&](const GroupElement& g) { inverses.insert(grp.inverse(g)); });
    if (inverses.size() > cap / std::max<std::size_t>(fn, 1))
        throw CapacityError("Shulman enumeration needs " + std::to_string(inverses.size()) + " x " +
                            std::to_string(fn) + " products, above the cap of " + std::to_string(cap));
    std::unordered_set<GroupElement, GroupElementHash> product;
    product.reserve(std::min(inverses.size() * fn, cap));
    const auto fset = seq.set(n);
    for (const auto& u : inverses)
        for (const auto& f : fset) product.insert(grp.multiply(u, f));
    return static_cast<double>(product.size()) / static_cast<double>(fn);
}

TemperedReport tempered_report(const FolnerSequence& seq, std::size_t horizon, double bound, std::size_t cap) {
    if (horizon == 0) throw DomainError("tempered_report horizon must be at least 1");
    if (const auto len = seq.length(); len && horizon > *len)
        throw DomainError("tempered_report horizon exceeds the custom family length");
    TemperedReport rep;
    rep.bound = bound;
    rep.ratios.reserve(horizon);
    for (std::size_t n = 1; n <= horizon; ++n) {
        const double r = shulman_ratio(seq, n, cap);
        rep.ratios.push_back(r);
        if (r > rep.max_ratio) {
            rep.max_ratio = r;
            rep.argmax = n;
        }
    }
    rep.is_tempered = rep.max_ratio <= bound;
    return rep;
}

}  // namespace hel
