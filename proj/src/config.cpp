#include "fermikin/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "fermikin/error.hpp"

namespace fermikin
{
namespace
{

std::string trim(std::string const& s)
{
    auto const b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    auto const e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    // shortest text that reads back to the same double
    for (int p = 1; p < 17; ++p)
    {
        char shorter[32];
        std::snprintf(shorter, sizeof shorter, "%.*g", p, x);
        if (std::strtod(shorter, nullptr) == x)
            return shorter;
    }
    return buf;
}

double parse_number(std::string const& text, std::string const& key)
{
    std::string const t = trim(text);
    double x = 0.0;
    auto const [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ParseError(key + ": expected a number, got '" + text + "'");
    if (!std::isfinite(x))
        throw ParseError(key + ": value must be finite");
    return x;
}

int parse_int(std::string const& text, std::string const& key)
{
    std::string const t = trim(text);
    int x = 0;
    auto const [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ParseError(key + ": expected an integer, got '" + text + "'");
    return x;
}

bool parse_bool(std::string const& text, std::string const& key)
{
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "yes" || t == "on" || t == "1")
        return true;
    if (t == "false" || t == "no" || t == "off" || t == "0")
        return false;
    throw ParseError(key + ": expected true or false, got '" + text + "'");
}

Vec3 parse_vec3(std::string const& text, std::string const& key)
{
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        parts.push_back(parse_number(item, key));
    if (parts.size() != 3)
        throw ParseError(key + ": expected three comma-separated numbers");
    return {parts[0], parts[1], parts[2]};
}

std::string format_vec3(Vec3 const& v)
{
    return format_number(v.x) + ", " + format_number(v.y) + ", " + format_number(v.z);
}

std::string format_bool(bool b)
{
    return b ? "true" : "false";
}

struct Field
{
    std::string key;  // section.name
    std::function<void(RunConfig&, std::string const&)> set;
    std::function<std::optional<std::string>(RunConfig const&)> get;
};

// Fields that take a file path as their single argument.
bool takes_path(std::string const& name)
{
    return name == "tabulated" || name == "file";
}

std::vector<Field> const& fields()
{
    using C = RunConfig;
    using S = std::string;
    static std::vector<Field> const table = {
        {"domain.shape", [](C& c, S const& v) { c.domain.shape = trim(v); },
         [](C const& c) { return c.domain.shape; }},
        {"domain.center", [](C& c, S const& v) { c.domain.center = parse_vec3(v, "domain.center"); },
         [](C const& c) { return format_vec3(c.domain.center); }},
        {"domain.radius", [](C& c, S const& v) { c.domain.radius = parse_number(v, "domain.radius"); },
         [](C const& c) { return format_number(c.domain.radius); }},
        {"domain.axis", [](C& c, S const& v) { c.domain.axis = parse_vec3(v, "domain.axis"); },
         [](C const& c) { return format_vec3(c.domain.axis); }},
        {"domain.low", [](C& c, S const& v) { c.domain.low = parse_number(v, "domain.low"); },
         [](C const& c) { return format_number(c.domain.low); }},
        {"domain.high", [](C& c, S const& v) { c.domain.high = parse_number(v, "domain.high"); },
         [](C const& c) { return format_number(c.domain.high); }},
        {"domain.period", [](C& c, S const& v) { c.domain.period = parse_number(v, "domain.period"); },
         [](C const& c) { return format_number(c.domain.period); }},
        {"domain.tangent_tolerance",
         [](C& c, S const& v) { c.domain.tangent_tolerance = parse_number(v, "domain.tangent_tolerance"); },
         [](C const& c) { return format_number(c.domain.tangent_tolerance); }},

        {"space.kind", [](C& c, S const& v) { c.space.kind = trim(v); },
         [](C const& c) { return c.space.kind; }},
        {"space.cells", [](C& c, S const& v) { c.space.cells = parse_int(v, "space.cells"); },
         [](C const& c) { return std::to_string(c.space.cells); }},
        {"space.axis", [](C& c, S const& v) { c.space.axis = parse_int(v, "space.axis"); },
         [](C const& c) { return std::to_string(c.space.axis); }},
        {"space.low", [](C& c, S const& v) { c.space.low = parse_number(v, "space.low"); },
         [](C const& c) { return format_number(c.space.low); }},
        {"space.high", [](C& c, S const& v) { c.space.high = parse_number(v, "space.high"); },
         [](C const& c) { return format_number(c.space.high); }},

        {"velocity.v_max", [](C& c, S const& v) { c.velocity.v_max = parse_number(v, "velocity.v_max"); },
         [](C const& c) { return format_number(c.velocity.v_max); }},
        {"velocity.nodes", [](C& c, S const& v) { c.velocity.nodes = parse_int(v, "velocity.nodes"); },
         [](C const& c) { return std::to_string(c.velocity.nodes); }},

        {"collision.kernel", [](C& c, S const& v) { c.collision.kernel = parse_call(v, "collision.kernel"); },
         [](C const& c) { return format_call(c.collision.kernel); }},
        {"collision.target_norm",
         [](C& c, S const& v) {
             if (trim(v) == "none")
                 c.collision.target_norm.reset();
             else
                 c.collision.target_norm = parse_number(v, "collision.target_norm");
         },
         [](C const& c) -> std::optional<std::string> {
             if (!c.collision.target_norm)
                 return "none";
             return format_number(*c.collision.target_norm);
         }},
        {"collision.sphere", [](C& c, S const& v) { c.collision.sphere = parse_call(v, "collision.sphere"); },
         [](C const& c) { return format_call(c.collision.sphere); }},
        {"collision.conservative",
         [](C& c, S const& v) { c.collision.conservative = parse_bool(v, "collision.conservative"); },
         [](C const& c) { return format_bool(c.collision.conservative); }},

        {"time.theta", [](C& c, S const& v) { c.time.theta = parse_number(v, "time.theta"); },
         [](C const& c) { return format_number(c.time.theta); }},
        {"time.steps", [](C& c, S const& v) { c.time.steps = parse_int(v, "time.steps"); },
         [](C const& c) { return std::to_string(c.time.steps); }},
        {"time.picard_tol", [](C& c, S const& v) { c.time.picard_tol = parse_number(v, "time.picard_tol"); },
         [](C const& c) { return format_number(c.time.picard_tol); }},
        {"time.picard_max_iter",
         [](C& c, S const& v) { c.time.picard_max_iter = parse_int(v, "time.picard_max_iter"); },
         [](C const& c) { return std::to_string(c.time.picard_max_iter); }},
        {"time.contraction_safety",
         [](C& c, S const& v) { c.time.contraction_safety = parse_number(v, "time.contraction_safety"); },
         [](C const& c) { return format_number(c.time.contraction_safety); }},

        {"initial.profile", [](C& c, S const& v) { c.initial.profile = parse_call(v, "initial.profile"); },
         [](C const& c) { return format_call(c.initial.profile); }},
        {"initial.shift", [](C& c, S const& v) { c.initial.shift = parse_vec3(v, "initial.shift"); },
         [](C const& c) { return format_vec3(c.initial.shift); }},
        {"initial.modulation",
         [](C& c, S const& v) { c.initial.modulation = parse_number(v, "initial.modulation"); },
         [](C const& c) { return format_number(c.initial.modulation); }},

        {"output.directory", [](C& c, S const& v) { c.output.directory = trim(v); },
         [](C const& c) { return c.output.directory; }},
        {"output.snapshot_stride",
         [](C& c, S const& v) { c.output.snapshot_stride = parse_int(v, "output.snapshot_stride"); },
         [](C const& c) { return std::to_string(c.output.snapshot_stride); }},

        {"diagnostics.weak_residual",
         [](C& c, S const& v) { c.diagnostics.weak_residual = parse_bool(v, "diagnostics.weak_residual"); },
         [](C const& c) { return format_bool(c.diagnostics.weak_residual); }},
        {"diagnostics.cutoff_radius",
         [](C& c, S const& v) { c.diagnostics.cutoff_radius = parse_number(v, "diagnostics.cutoff_radius"); },
         [](C const& c) { return format_number(c.diagnostics.cutoff_radius); }},
        {"diagnostics.region_radius",
         [](C& c, S const& v) { c.diagnostics.region_radius = parse_number(v, "diagnostics.region_radius"); },
         [](C const& c) { return format_number(c.diagnostics.region_radius); }},

        {"run.seed",
         [](C& c, S const& v) {
             std::string const t = trim(v);
             std::uint64_t x = 0;
             auto const [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
             if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
                 throw ParseError("run.seed: expected a nonnegative integer, got '" + v + "'");
             c.seed = x;
         },
         [](C const& c) { return std::to_string(c.seed); }},
    };
    return table;
}

std::vector<std::string> known_keys()
{
    std::vector<std::string> keys;
    for (auto const& f : fields())
        keys.push_back(f.key);
    return keys;
}

std::size_t edit_distance(std::string const& a, std::string const& b)
{
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
    {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
        {
            std::size_t const sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

void require(bool ok, std::string const& constraint, std::string const& message)
{
    if (!ok)
        throw ValidationError(constraint, constraint + ": " + message);
}

std::size_t arity(CallSpec const& call)
{
    return call.args.size();
}

}  // namespace

std::string nearest_key(std::string const& key, std::vector<std::string> const& known)
{
    std::string best;
    std::size_t best_d = std::string::npos;
    for (auto const& k : known)
    {
        // compare against the full key and against its name without section
        std::size_t d = edit_distance(key, k);
        auto const dot = k.find('.');
        auto const key_dot = key.find('.');
        if (dot != std::string::npos && key_dot != std::string::npos)
            d = std::min(d, edit_distance(key.substr(key_dot + 1), k.substr(dot + 1)) + 1);
        if (d < best_d)
        {
            best_d = d;
            best = k;
        }
    }
    if (best_d > std::max<std::size_t>(3, key.size() / 2))
        return {};
    return best;
}

CallSpec parse_call(std::string const& text, std::string const& key)
{
    std::string const t = trim(text);
    CallSpec call;
    auto const open = t.find('(');
    if (open == std::string::npos)
    {
        call.name = t;
    }
    else
    {
        if (t.back() != ')')
            throw ParseError(key + ": missing ')' in '" + text + "'");
        call.name = trim(t.substr(0, open));
        std::string const inner = trim(t.substr(open + 1, t.size() - open - 2));
        if (takes_path(call.name))
        {
            call.path = inner;
        }
        else if (!inner.empty())
        {
            std::stringstream ss(inner);
            std::string item;
            while (std::getline(ss, item, ','))
                call.args.push_back(parse_number(item, key));
        }
    }
    if (call.name.empty())
        throw ParseError(key + ": empty value");
    return call;
}

std::string format_call(CallSpec const& call)
{
    if (takes_path(call.name))
        return call.name + "(" + call.path + ")";
    if (call.args.empty())
        return call.name;
    std::string s = call.name + "(";
    for (std::size_t i = 0; i < call.args.size(); ++i)
        s += (i ? ", " : "") + format_number(call.args[i]);
    return s + ")";
}

RunConfig parse_config_text(std::string const& text, std::string const& origin)
{
    RunConfig config;
    auto const& table = fields();
    std::vector<std::string> const keys = known_keys();
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        auto const comment = line.find_first_of("#;");
        if (comment != std::string::npos)
            line.erase(comment);
        line = trim(line);
        if (line.empty())
            continue;
        std::string const where = origin + ":" + std::to_string(line_no) + ": ";
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw ParseError(where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            bool const known = std::any_of(keys.begin(), keys.end(),
                                           [&](std::string const& k) { return k.starts_with(section + "."); });
            if (!known)
                throw ParseError(where + "unknown section [" + section + "]");
            continue;
        }
        auto const eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(where + "expected 'key = value'");
        std::string const name = trim(line.substr(0, eq));
        std::string const value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ParseError(where + "key '" + name + "' appears before any [section]");
        std::string const full = section + "." + name;
        auto const it = std::find_if(table.begin(), table.end(), [&](Field const& f) { return f.key == full; });
        if (it == table.end())
        {
            std::string msg = where + "unknown key '" + full + "'";
            std::string const near = nearest_key(full, keys);
            if (!near.empty())
                msg += "; did you mean '" + near + "'?";
            throw ParseError(msg);
        }
        try
        {
            it->set(config, value);
        }
        catch (ParseError const& e)
        {
            throw ParseError(where + e.what());
        }
    }
    return config;
}

RunConfig parse_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    RunConfig config = parse_config_text(buf.str(), path);
    validate(config);
    return config;
}

std::string serialize_config(RunConfig const& config)
{
    std::ostringstream os;
    std::string section;
    for (auto const& f : fields())
    {
        auto const dot = f.key.find('.');
        std::string const sec = f.key.substr(0, dot);
        auto const value = f.get(config);
        if (!value)
            continue;
        if (sec != section)
        {
            if (!section.empty())
                os << '\n';
            os << '[' << sec << "]\n";
            section = sec;
        }
        os << f.key.substr(dot + 1) << " = " << *value << '\n';
    }
    return os.str();
}

namespace
{

Domain build_domain(DomainSpec const& d)
{
    require(d.tangent_tolerance > 0 && d.tangent_tolerance < 1, "domain.tangent_tolerance",
            "must lie in (0, 1)");
    if (d.shape == "full")
        return Domain(FullSpace{}, d.tangent_tolerance);
    if (d.shape == "ball")
    {
        require(d.radius > 0, "domain.radius", "ball radius must be positive");
        return Domain(Ball{d.center, d.radius}, d.tangent_tolerance);
    }
    if (d.shape == "slab")
    {
        require(std::abs(norm(d.axis) - 1.0) <= 1e-12, "domain.axis", "slab axis must be a unit vector");
        require(d.low < d.high, "domain.extent", "slab needs low < high");
        require(d.period > 0, "domain.period", "tangential period must be positive");
        return Domain(Slab{d.axis, d.low, d.high, d.period}, d.tangent_tolerance);
    }
    throw ValidationError("domain.shape", "domain.shape: expected full, ball or slab, got '" + d.shape + "'");
}

SpatialGrid build_spatial(SpaceSpec const& s, Domain const& domain)
{
    if (s.kind == "homogeneous")
        return SpatialGrid::homogeneous();
    if (s.kind == "line")
    {
        if (domain.is_full_space())
            return SpatialGrid::periodic_line(s.axis, s.low, s.high, s.cells);
        return SpatialGrid::line(domain, s.cells);
    }
    if (s.kind == "ball")
        return SpatialGrid::ball(domain, s.cells);
    throw ValidationError("space.kind", "space.kind: expected homogeneous, line or ball, got '" + s.kind + "'");
}

CollisionKernel build_kernel(CallSpec const& k)
{
    if (k.name == "constant")
    {
        require(arity(k) == 2, "collision.kernel", "constant takes (radius, amplitude)");
        require(k.args[0] > 0, "collision.kernel", "constant kernel radius must be positive");
        require(k.args[1] >= 0, "collision.kernel", "constant kernel amplitude must be nonnegative");
        return CollisionKernel::constant(k.args[0], k.args[1]);
    }
    if (k.name == "zero")
    {
        require(arity(k) == 0, "collision.kernel", "zero takes no arguments");
        return CollisionKernel::zero();
    }
    if (k.name == "tabulated")
    {
        require(!k.path.empty(), "collision.kernel", "tabulated needs a file path");
        return CollisionKernel::from_csv(k.path);
    }
    throw ValidationError("collision.kernel",
                          "collision.kernel: expected constant(r, a), tabulated(path) or zero, got '"
                              + format_call(k) + "'");
}

SphereQuadrature build_sphere(CallSpec const& s)
{
    auto const whole = [](double x) { return x == std::floor(x) && x > 0; };
    if (s.name == "lebedev")
    {
        require(arity(s) == 1 && whole(s.args[0]), "collision.sphere", "lebedev takes a node count");
        int const n = static_cast<int>(s.args[0]);
        require(n == 6 || n == 14 || n == 26, "collision.sphere", "lebedev rules have 6, 14 or 26 nodes");
        return SphereQuadrature::lebedev(n);
    }
    if (s.name == "product")
    {
        require(arity(s) == 2 && whole(s.args[0]) && whole(s.args[1]), "collision.sphere",
                "product takes (n_polar, n_azimuth)");
        int const na = static_cast<int>(s.args[1]);
        require(na % 2 == 0, "collision.sphere", "product azimuth count must be even");
        return SphereQuadrature::product(static_cast<int>(s.args[0]), na);
    }
    throw ValidationError("collision.sphere",
                          "collision.sphere: expected lebedev(n) or product(np, na), got '" + format_call(s)
                              + "'");
}

void check_initial(InitialSpec const& init, SpaceSpec const& space)
{
    auto const& p = init.profile;
    auto const in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (p.name == "constant")
        require(arity(p) == 1 && in_unit(p.args[0]), "initial.profile", "constant(c) needs c in [0, 1]");
    else if (p.name == "fermi_dirac")
        require(arity(p) == 2 && p.args[1] > 0, "initial.profile", "fermi_dirac(a, b) needs b > 0");
    else if (p.name == "double_bump")
        require((arity(p) == 0 || arity(p) == 4)
                    && (arity(p) == 0 || (p.args[0] >= 0 && p.args[1] > 0 && p.args[2] >= 0 && p.args[3] > 0)),
                "initial.profile", "double_bump(p1, w1, p2, w2) needs peaks >= 0 and widths > 0");
    else if (p.name == "random")
        require(arity(p) == 2 && in_unit(p.args[0]) && in_unit(p.args[1]) && p.args[0] <= p.args[1],
                "initial.profile", "random(lo, hi) needs 0 <= lo <= hi <= 1");
    else if (p.name == "file")
        require(!p.path.empty(), "initial.profile", "file(path) needs a path");
    else
        throw ValidationError("initial.profile", "initial.profile: unknown profile '" + p.name + "'");
    require(std::abs(init.modulation) < 1.0, "initial.modulation", "modulation amplitude must be below 1");
    require(init.modulation == 0.0 || space.kind == "line", "initial.modulation",
            "spatial modulation needs a line grid");
}

}  // namespace

RunSetup build_setup(RunConfig const& config)
{
    Domain domain = build_domain(config.domain);
    SpatialGrid spatial = build_spatial(config.space, domain);
    require(config.velocity.v_max > 0, "velocity.v_max", "must be positive");
    require(config.velocity.nodes >= 3 && config.velocity.nodes % 2 == 1, "velocity.nodes",
            "must be an odd integer >= 3");
    VelocityGrid velocity(config.velocity.v_max, config.velocity.nodes);
    SphereQuadrature sphere = build_sphere(config.collision.sphere);
    CollisionKernel kernel = build_kernel(config.collision.kernel);

    double B = kernel_l1_norm(kernel, velocity, sphere);
    if (config.collision.target_norm)
    {
        double const target = *config.collision.target_norm;
        require(target >= 0, "collision.target_norm", "must be nonnegative");
        require(B > 0 || target == 0, "collision.target_norm", "cannot rescale a kernel with zero norm");
        if (B > 0)
        {
            kernel = kernel.scaled(target / B);
            B = kernel_l1_norm(kernel, velocity, sphere);
        }
    }
    kernel.cache_l1_norm(velocity, sphere);

    auto const& t = config.time;
    require(t.theta > 0, "time.theta", "must be positive");
    require(t.steps >= 0, "time.steps", "must be nonnegative");
    require(t.picard_tol > 0, "time.picard_tol", "must be positive");
    require(t.picard_max_iter >= 1, "time.picard_max_iter", "must be at least 1");
    require(t.contraction_safety > 0 && t.contraction_safety < 1, "time.contraction_safety",
            "must lie in (0, 1)");
    if (t.theta * 4.0 * B > t.contraction_safety)
    {
        std::ostringstream os;
        os << "contraction bound: theta * 4B = " << t.theta * 4.0 * B << " exceeds contraction_safety "
           << t.contraction_safety << " (B = " << B << "); use theta <= "
           << t.contraction_safety / (4.0 * B);
        throw ValidationError("contraction_bound", os.str());
    }

    check_initial(config.initial, config.space);
    require(config.output.snapshot_stride >= 0, "output.snapshot_stride", "must be nonnegative");
    require(config.diagnostics.cutoff_radius > 0, "diagnostics.cutoff_radius", "must be positive");
    require(config.diagnostics.region_radius > 0, "diagnostics.region_radius", "must be positive");
    if (config.diagnostics.weak_residual)
        require(config.velocity.v_max >= 2.0 * config.diagnostics.cutoff_radius, "diagnostics.cutoff_radius",
                "weak residual needs v_max >= 2 * cutoff_radius");

    StepConfig step;
    step.theta = t.theta;
    step.picard_tol = t.picard_tol;
    step.picard_max_iter = t.picard_max_iter;
    step.contraction_safety = t.contraction_safety;
    step.conservative = config.collision.conservative;
    return RunSetup{std::move(domain), std::move(spatial), velocity, std::move(kernel), std::move(sphere), step, B};
}

void validate(RunConfig const& config)
{
    build_setup(config);
}

}  // namespace fermikin
