#include "hel/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "hel/errors.hpp"

namespace hel::config {

namespace {

bool valid_key(std::string_view k) {
    if (k.empty() || !(std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_')) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto dot = path.find('.', start);
        parts.emplace_back(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts;
}

// Net bracket depth of a JSON fragment, ignoring string contents.
int bracket_depth(std::string_view s, bool& in_string) {
    int depth = 0;
    bool escape = false;
    for (char c : s) {
        if (in_string) {
            if (escape) escape = false;
            else if (c == '\\') escape = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '[' || c == '{') ++depth;
        else if (c == ']' || c == '}') --depth;
    }
    return depth;
}

std::string where(std::size_t line) { return "line " + std::to_string(line); }

void emit_section(std::ostringstream& out, const Json& obj, const std::string& prefix) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!it->is_object()) out << it.key() << " = " << it->dump() << '\n';
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!it->is_object()) continue;
        std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        out << '\n' << '[' << path << "]\n";
        emit_section(out, *it, path);
    }
}

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string join(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

double as_double(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError("expected a number", path);
    return j.get<double>();
}

std::int64_t as_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ParseError("expected an integer", path);
    return j.get<std::int64_t>();
}

std::size_t as_size(const Json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) throw ParseError("expected a nonnegative integer", path);
    return j.get<std::size_t>();
}

const Json& as_array(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError("expected an array", path);
    return j;
}

std::vector<double> doubles(const Json& j, const std::string& path) {
    std::vector<double> out;
    const auto& a = as_array(j, path);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_double(a[i], join(path, i)));
    return out;
}

GroupElement parse_element(const Group& g, const Json& j, const std::string& path) {
    GroupElement e;
    if (j.is_number_integer()) {
        e.c[0] = j.get<std::int64_t>();
    } else {
        const auto& a = as_array(j, path);
        if (a.size() > 3) throw ParseError("group element has more than 3 coordinates", path);
        for (std::size_t i = 0; i < a.size(); ++i) e.c[i] = as_int(a[i], join(path, i));
    }
    try {
        e = g.normalize(e);
        g.check(e);
    } catch (const DomainError& err) {
        throw ParseError(std::string("invalid group element (") + err.what() + ")", path);
    }
    return e;
}

// Wraps library validation errors so the offending field is named.
template <class F>
auto with_path(const std::string& path, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& err) {
        throw ParseError(std::string("invalid value (") + err.what() + ")", path);
    }
}

}  // namespace

Json parse_cfg(std::string_view text) {
    Json root = Json::object();
    Json* section = &root;
    std::string section_path;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        auto s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError("unterminated section header", where(line_no));
            auto name = trim(s.substr(1, s.size() - 2));
            section = &root;
            section_path.clear();
            for (const auto& part : split_path(name)) {
                if (!valid_key(part)) throw ParseError("invalid section name '" + std::string(name) + "'", where(line_no));
                section_path = join(section_path, part);
                auto& next = (*section)[part];
                if (next.is_null()) next = Json::object();
                if (!next.is_object()) throw ParseError("section clashes with a value", section_path);
                section = &next;
            }
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", where(line_no));
        std::string key(trim(s.substr(0, eq)));
        if (!valid_key(key)) throw ParseError("invalid key '" + key + "'", where(line_no));
        std::string value(trim(s.substr(eq + 1)));
        std::size_t start_line = line_no;
        bool in_string = false;
        int depth = bracket_depth(value, in_string);
        while (depth > 0 && std::getline(in, line)) {
            ++line_no;
            value += '\n';
            value += line;
            depth += bracket_depth(line, in_string);
        }
        std::string path = join(section_path, key);
        if (section->contains(key)) throw ParseError("duplicate key", path);
        Json parsed;
        try {
            parsed = Json::parse(value);
        } catch (const Json::parse_error& err) {
            throw ParseError("bad value at " + where(start_line) + " (" + err.what() + ")", path);
        }
        (*section)[key] = std::move(parsed);
    }
    return root;
}

std::string to_cfg(const Json& root) {
    if (!root.is_object()) throw ParseError("configuration root must be an object");
    std::ostringstream out;
    emit_section(out, root, "");
    return out.str();
}

Json load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file", path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    if (path.extension() == ".json") {
        try {
            Json j = Json::parse(buf.str());
            if (!j.is_object()) throw ParseError("configuration root must be an object", path.string());
            return j;
        } catch (const Json::parse_error& err) {
            throw ParseError(std::string("bad JSON (") + err.what() + ")", path.string());
        }
    }
    return parse_cfg(buf.str());
}

const Json* find(const Json& root, std::string_view path) {
    const Json* cur = &root;
    for (const auto& part : split_path(path)) {
        if (!cur->is_object()) return nullptr;
        auto it = cur->find(part);
        if (it == cur->end()) return nullptr;
        cur = &*it;
    }
    return cur->is_null() ? nullptr : cur;
}

const Json& require(const Json& root, std::string_view path) {
    const Json* j = find(root, path);
    if (!j) throw ParseError("missing field", std::string(path));
    return *j;
}

double get_double(const Json& root, std::string_view path) { return as_double(require(root, path), std::string(path)); }

double get_double(const Json& root, std::string_view path, double fallback) {
    const Json* j = find(root, path);
    return j ? as_double(*j, std::string(path)) : fallback;
}

std::uint64_t get_uint(const Json& root, std::string_view path) {
    const Json& j = require(root, path);
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
        throw ParseError("expected a nonnegative integer", std::string(path));
    return j.get<std::uint64_t>();
}

std::uint64_t get_uint(const Json& root, std::string_view path, std::uint64_t fallback) {
    return find(root, path) ? get_uint(root, path) : fallback;
}

std::string get_string(const Json& root, std::string_view path) {
    const Json& j = require(root, path);
    if (!j.is_string()) throw ParseError("expected a string", std::string(path));
    return j.get<std::string>();
}

std::string get_string(const Json& root, std::string_view path, const std::string& fallback) {
    return find(root, path) ? get_string(root, path) : fallback;
}

bool get_bool(const Json& root, std::string_view path, bool fallback) {
    const Json* j = find(root, path);
    if (!j) return fallback;
    if (!j->is_boolean()) throw ParseError("expected true or false", std::string(path));
    return j->get<bool>();
}

// ---------------------------------------------------------------------------
// Spaces, points, measures

SpaceDescriptor parse_space(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ParseError("expected a space object", path);
    auto require = [&](const char* key) -> const Json& {
        const Json* v = find(j, key);
        if (!v) throw ParseError("missing field", join(path, key));
        return *v;
    };
    if (!require("kind").is_string()) throw ParseError("expected a string", join(path, "kind"));
    std::string kind = require("kind").get<std::string>();
    if (kind == "euclidean") {
        std::size_t dim = as_size(require("dim"), join(path, "dim"));
        return with_path(join(path, "dim"), [&] { return SpaceDescriptor::euclidean(dim); });
    }
    if (kind == "hyperboloid2") return SpaceDescriptor::hyperboloid2();
    if (kind == "metric_tree") {
        if (const Json* text = find(j, "edge_list")) {
            if (!text->is_string()) throw ParseError("expected a string", join(path, "edge_list"));
            return with_path(join(path, "edge_list"), [&] {
                return SpaceDescriptor::metric_tree(TreeShape::parse_edge_list(text->get<std::string>()));
            });
        }
        if (const Json* legs = find(j, "legs")) {
            auto lengths = doubles(*legs, join(path, "legs"));
            return with_path(join(path, "legs"), [&] { return SpaceDescriptor::metric_tree(TreeShape::star(lengths)); });
        }
        std::string epath = join(path, "edges");
        const auto& edges = as_array(require("edges"), epath);
        std::vector<TreeEdge> out;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            std::string ip = join(epath, i);
            const auto& e = as_array(edges[i], ip);
            if (e.size() != 3) throw ParseError("edge must be [u, v, length]", ip);
            out.push_back({as_size(e[0], ip), as_size(e[1], ip), as_double(e[2], ip)});
        }
        return with_path(epath, [&] { return SpaceDescriptor::metric_tree(TreeShape(std::move(out))); });
    }
    if (kind == "product") {
        std::string fpath = join(path, "factors");
        const auto& fs = as_array(require("factors"), fpath);
        std::vector<SpaceDescriptor> factors;
        for (std::size_t i = 0; i < fs.size(); ++i) factors.push_back(parse_space(fs[i], join(fpath, i)));
        return with_path(fpath, [&] { return SpaceDescriptor::product(std::move(factors)); });
    }
    throw ParseError("unknown space kind '" + kind + "'", join(path, "kind"));
}

Json space_json(const SpaceDescriptor& space) {
    switch (space.kind()) {
        case SpaceKind::euclidean: return {{"kind", "euclidean"}, {"dim", space.dim()}};
        case SpaceKind::hyperboloid2: return {{"kind", "hyperboloid2"}};
        case SpaceKind::metric_tree: {
            Json edges = Json::array();
            for (const auto& e : space.tree().edges()) edges.push_back({e.u, e.v, e.length});
            return {{"kind", "metric_tree"}, {"edges", edges}};
        }
        case SpaceKind::product: {
            Json fs = Json::array();
            for (const auto& f : space.factors()) fs.push_back(space_json(f));
            return {{"kind", "product"}, {"factors", fs}};
        }
    }
    return {};
}

SpacePoint parse_point(const SpaceDescriptor& space, const Json& j, const std::string& path) {
    auto coords = doubles(j, path);
    if (space.kind() == SpaceKind::hyperboloid2 && coords.size() == 2)
        return with_path(path, [&] { return hyperboloid_point(coords[0], coords[1]); });
    if (coords.size() != space.coord_size())
        throw ParseError("expected " + std::to_string(space.coord_size()) + " coordinates", path);
    return with_path(path, [&] { return SpacePoint(space, std::move(coords)); });
}

Json point_json(const SpacePoint& p) {
    Json out = Json::array();
    for (double c : p.coords()) out.push_back(c);
    return out;
}

FiniteMeasure parse_measure(const Json& j) {
    SpaceDescriptor space = parse_space(require(j, "space"), "space");
    const auto& atoms = as_array(require(j, "atoms"), "atoms");
    if (atoms.empty()) throw ParseError("measure needs at least one atom", "atoms");
    std::vector<SpacePoint> points;
    for (std::size_t i = 0; i < atoms.size(); ++i) points.push_back(parse_point(space, atoms[i], join("atoms", i)));
    std::vector<double> weights(points.size(), 1.0);
    if (const Json* w = find(j, "weights")) {
        weights = doubles(*w, "weights");
        if (weights.size() != points.size()) throw ParseError("weights and atoms differ in length", "weights");
    }
    return with_path("weights", [&] { return FiniteMeasure::normalized(std::move(points), std::move(weights)); });
}

Json measure_json(const FiniteMeasure& mu) {
    Json atoms = Json::array();
    for (const auto& a : mu.atoms()) atoms.push_back(point_json(a));
    return {{"space", space_json(mu.space())}, {"atoms", atoms}, {"weights", mu.weights()}};
}

// ---------------------------------------------------------------------------
// Scenario

Group build_group(const Json& root) {
    std::string kind = get_string(root, "group.kind");
    if (kind == "integers") return Group::integers();
    if (kind == "lattice") {
        std::size_t dim = get_uint(root, "group.dim");
        return with_path("group.dim", [&] { return Group::lattice(dim); });
    }
    if (kind == "cyclic") {
        auto order = static_cast<std::int64_t>(get_uint(root, "group.order"));
        return with_path("group.order", [&] { return Group::cyclic(order); });
    }
    if (kind == "heisenberg") return Group::heisenberg();
    throw ParseError("unknown group kind '" + kind + "'", "group.kind");
}

FolnerSequence build_folner(const Json& root, const Group& group) {
    std::string family = get_string(root, "folner.family");
    if (family == "interval") return with_path("folner.family", [&] { return FolnerSequence::interval(group); });
    if (family == "box") return with_path("folner.family", [&] { return FolnerSequence::box(group); });
    if (family == "custom") {
        const auto& sets = as_array(require(root, "folner.sets"), "folner.sets");
        std::vector<std::vector<GroupElement>> out;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            std::string sp = join("folner.sets", i);
            const auto& s = as_array(sets[i], sp);
            std::vector<GroupElement> elems;
            for (std::size_t k = 0; k < s.size(); ++k) elems.push_back(parse_element(group, s[k], join(sp, k)));
            out.push_back(std::move(elems));
        }
        std::string label = get_string(root, "folner.label", "custom");
        return with_path("folner.sets", [&] { return FolnerSequence::custom(group, std::move(out), label); });
    }
    throw ParseError("unknown Folner family '" + family + "'", "folner.family");
}

System build_system(const Json& root, const Group& group) {
    std::string kind = get_string(root, "system.kind");
    std::string label = get_string(root, "system.label", kind);
    if (kind == "torus_rotation") {
        std::size_t dim = get_uint(root, "system.dim");
        const auto& a = as_array(require(root, "system.alphas"), "system.alphas");
        std::vector<std::array<double, 3>> alphas;
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string ip = join("system.alphas", i);
            auto v = a[i].is_number() ? std::vector<double>{as_double(a[i], ip)} : doubles(a[i], ip);
            if (v.size() != dim) throw ParseError("rotation vector must have system.dim entries", ip);
            std::array<double, 3> arr{};
            std::copy(v.begin(), v.end(), arr.begin());
            alphas.push_back(arr);
        }
        return with_path("system.alphas", [&] { return System::torus_rotation(group, dim, alphas, label); });
    }
    if (kind == "cyclic_rotation") {
        if (group.kind() != GroupKind::cyclic) throw ParseError("cyclic_rotation needs a cyclic group", "group.kind");
        return System::cyclic_rotation(group.order());
    }
    if (kind == "finite_permutation") {
        auto weights = doubles(require(root, "system.weights"), "system.weights");
        double total = 0.0;
        for (double w : weights) {
            if (!(w > 0.0)) throw ParseError("weights must be positive", "system.weights");
            total += w;
        }
        for (double& w : weights) w /= total;
        const auto& ps = as_array(require(root, "system.permutations"), "system.permutations");
        std::vector<std::vector<std::size_t>> perms;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            std::string ip = join("system.permutations", i);
            const auto& p = as_array(ps[i], ip);
            std::vector<std::size_t> perm;
            for (std::size_t k = 0; k < p.size(); ++k) perm.push_back(as_size(p[k], join(ip, k)));
            perms.push_back(std::move(perm));
        }
        return with_path("system.permutations",
                         [&] { return System::finite_permutation(group, std::move(weights), std::move(perms), label); });
    }
    if (kind == "two_component") {
        if (group.kind() != GroupKind::integers) throw ParseError("two_component needs the integers", "group.kind");
        double a0 = get_double(root, "system.alpha0");
        double a1 = get_double(root, "system.alpha1");
        double p0 = get_double(root, "system.p0", 0.5);
        return with_path("system", [&] { return System::two_component(a0, a1, p0, label); });
    }
    if (kind == "bernoulli_shift") {
        if (!get_bool(root, "system.allow_demo", false))
            throw ParseError("bernoulli_shift is a demonstration model; set allow_demo = true", "system.allow_demo");
        if (group.kind() != GroupKind::integers) throw ParseError("bernoulli_shift needs the integers", "group.kind");
        double p = get_double(root, "system.p_one");
        return with_path("system.p_one", [&] { return System::bernoulli_shift(p, label); });
    }
    throw ParseError("unknown system kind '" + kind + "'", "system.kind");
}

Observable build_observable(const Json& root, std::string_view section, const System& system) {
    const std::string sec(section);
    auto p = [&](std::string_view key) { return join(sec, key); };
    std::string kind = get_string(root, p("kind"));
    auto point2 = [&](std::string_view key, std::array<double, 2> fallback) {
        const Json* j = find(root, p(key));
        if (!j) return fallback;
        auto v = doubles(*j, p(key));
        if (v.size() != 2) throw ParseError("expected two numbers", p(key));
        return std::array<double, 2>{v[0], v[1]};
    };
    return with_path(sec, [&]() -> Observable {
        if (kind == "circle") {
            auto c = point2("centre", {0.0, 0.0});
            return observables::circle(system, get_double(root, p("radius"), 1.0), c[0], c[1]);
        }
        if (kind == "torus_embedding") return observables::torus_embedding(system);
        if (kind == "hyperbolic_loop")
            return observables::hyperbolic_loop(system, get_double(root, p("offset"), 0.8),
                                                get_double(root, p("radius"), 1.0));
        if (kind == "tripod_loop") {
            const Json* tree = find(root, p("tree"));
            SpaceDescriptor space = tree ? parse_space(*tree, p("tree"))
                                         : SpaceDescriptor::metric_tree(TreeShape::star(
                                               doubles(require(root, p("legs")), p("legs"))));
            return observables::tripod_loop(system, space);
        }
        if (kind == "component_circles") {
            auto c0 = point2("centre0", {0.0, 0.0});
            auto c1 = point2("centre1", {3.0, 0.0});
            return observables::component_circles(system, c0, get_double(root, p("radius0"), 1.0), c1,
                                                  get_double(root, p("radius1"), 1.0));
        }
        if (kind == "atom_values" || kind == "constant" || kind == "shift_coordinate") {
            SpaceDescriptor space = parse_space(require(root, p("space")), p("space"));
            if (kind == "constant") return observables::constant(system, parse_point(space, require(root, p("value")), p("value")));
            const auto& vs = as_array(require(root, p("values")), p("values"));
            std::vector<SpacePoint> values;
            for (std::size_t i = 0; i < vs.size(); ++i) values.push_back(parse_point(space, vs[i], join(p("values"), i)));
            if (kind == "atom_values") return observables::atom_values(system, std::move(values));
            if (values.size() != 2) throw ParseError("shift_coordinate needs two values", p("values"));
            return observables::shift_coordinate(system, values[0], values[1]);
        }
        throw ParseError("unknown observable kind '" + kind + "'", p("kind"));
    });
}

Scenario build_scenario(const Json& root) {
    Scenario s;
    s.name = get_string(root, "scenario");
    if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
        throw ParseError("scenario must be a plain file name", "scenario");
    s.seed = get_uint(root, "seed");
    s.group = build_group(root);
    s.folner = build_folner(root, s.group);
    s.system = build_system(root, s.group);
    s.observable = build_observable(root, "observable", s.system);
    return s;
}

ConvergenceSetup convergence_setup(const Json& root, const Scenario& s) {
    ConvergenceSetup c;
    c.scenario = s.name;
    c.seed = s.seed;
    c.omega_samples = get_uint(root, "converge.omega_samples", c.omega_samples);
    c.schedule_exponent = get_uint(root, "converge.schedule_exponent", c.schedule_exponent);
    c.tolerance = get_double(root, "converge.tolerance");
    c.shulman_bound = get_double(root, "folner.shulman_bound", c.shulman_bound);
    c.temper_horizon = get_uint(root, "converge.temper_horizon", c.temper_horizon);
    if (const Json* g = find(root, "converge.invariance_shift"))
        c.invariance_shift = parse_element(s.group, *g, "converge.invariance_shift");
    c.invariance_tolerance = get_double(root, "converge.invariance_tolerance", c.invariance_tolerance);
    c.quad.precision = get_double(root, "converge.quadrature_precision", c.quad.precision);
    c.bary.tol = get_double(root, "converge.barycentre_tol", c.bary.tol);
    if (c.omega_samples == 0) throw ParseError("must be positive", "converge.omega_samples");
    if (c.schedule_exponent > 40) throw ParseError("too large", "converge.schedule_exponent");
    return c;
}

MaximalPlan maximal_plan(const Json& root, const Scenario& s) {
    MaximalPlan plan;
    auto& m = plan.setup;
    m.scenario = s.name;
    m.seed = s.seed;
    m.omega_samples = get_uint(root, "maximal.omega_samples", m.omega_samples);
    m.horizon = get_uint(root, "maximal.horizon", m.horizon);
    m.audit_omegas = get_uint(root, "maximal.audit_omegas", m.audit_omegas);
    if (const Json* a = find(root, "maximal.alphas")) m.alphas = doubles(*a, "maximal.alphas");
    m.quad.precision = get_double(root, "maximal.quadrature_precision", m.quad.precision);
    m.transport.support_cap = get_uint(root, "maximal.support_cap", m.transport.support_cap);
    plan.comparison = get_string(root, "maximal.comparison", plan.comparison);
    if (plan.comparison == "approximation") {
        plan.approximation_target = get_double(root, "maximal.approximation_target");
        if (!(plan.approximation_target > 0.0)) throw ParseError("must be positive", "maximal.approximation_target");
    } else if (plan.comparison != "identical") {
        throw ParseError("expected 'identical' or 'approximation'", "maximal.comparison");
    }
    if (find(root, "maximal.stability_seed")) plan.stability_seed = get_uint(root, "maximal.stability_seed");
    plan.stability_tolerance = get_double(root, "maximal.stability_tolerance", plan.stability_tolerance);
    if (m.omega_samples == 0 || m.horizon == 0) throw ParseError("must be positive", "maximal.horizon");
    return plan;
}

}  // namespace hel::config
