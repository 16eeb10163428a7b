#include "pneutop/config.hpp"

#include "pneutop/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace pneutop {

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, res.ptr};
}

PhysicsParams OptConfig::physics() const
{
    PhysicsParams p;
    p.simp = simp;
    p.flow = flow;
    p.flow.delta_s = delta_s.value_or(filter_radius());
    p.nu = nu;
    return p;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

std::vector<std::string> words(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

class KeyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double to_double(const std::string& s)
{
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
        throw KeyError("expected a finite number, got '" + s + "'");
    return v;
}

int to_int(const std::string& s)
{
    int v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw KeyError("expected an integer, got '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& s)
{
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw KeyError("expected a non-negative integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& s)
{
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw KeyError("expected true or false, got '" + s + "'");
}

Side to_side(const std::string& s)
{
    if (s == "left") return Side::left;
    if (s == "right") return Side::right;
    if (s == "bottom") return Side::bottom;
    if (s == "top") return Side::top;
    throw KeyError("expected left, right, bottom or top, got '" + s + "'");
}

ElementRect to_rect(const std::string& s)
{
    const auto w = words(s);
    if (w.size() != 4) throw KeyError("rectangle needs 'x0 y0 x1 y1', got '" + s + "'");
    return {to_int(w[0]), to_int(w[1]), to_int(w[2]), to_int(w[3])};
}

std::vector<ElementRect> to_rects(const std::string& s)
{
    std::vector<ElementRect> out;
    if (s.empty()) return out;
    for (const auto& item : split(s, ';'))
        if (!item.empty()) out.push_back(to_rect(item));
    return out;
}

std::vector<NodeSegment> to_segments(const std::string& s)
{
    std::vector<NodeSegment> out;
    if (s.empty()) return out;
    for (const auto& item : split(s, ';')) {
        if (item.empty()) continue;
        const auto w = words(item);
        if (w.size() != 3) throw KeyError("segment needs 'side from to', got '" + item + "'");
        out.push_back({to_side(w[0]), to_int(w[1]), to_int(w[2])});
    }
    return out;
}

std::string rect_text(const ElementRect& r)
{
    return std::to_string(r.x0) + " " + std::to_string(r.y0) + " " + std::to_string(r.x1) + " " +
           std::to_string(r.y1);
}

std::string rects_text(const std::vector<ElementRect>& rects)
{
    std::string out;
    for (std::size_t i = 0; i < rects.size(); ++i) out += (i ? "; " : "") + rect_text(rects[i]);
    return out;
}

std::string segments_text(const std::vector<NodeSegment>& segs)
{
    std::string out;
    for (std::size_t i = 0; i < segs.size(); ++i)
        out += (i ? "; " : "") + to_string(segs[i].side) + " " + std::to_string(segs[i].from) + " " +
               std::to_string(segs[i].to);
    return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

struct KeySpec {
    std::string section;
    std::string key;
    bool required;
    std::function<void(OptConfig&, const std::string&)> read;
    std::function<std::string(const OptConfig&)> write;
};

#define PNEUTOP_DOUBLE(sec, name, field)                                                             \
    KeySpec{sec, name, false, [](OptConfig& c, const std::string& v) { c.field = to_double(v); }, \
            [](const OptConfig& c) { return format_double(c.field); }}
#define PNEUTOP_INT(sec, name, field)                                                             \
    KeySpec{sec, name, false, [](OptConfig& c, const std::string& v) { c.field = to_int(v); }, \
            [](const OptConfig& c) { return std::to_string(c.field); }}
#define PNEUTOP_BOOL(sec, name, field)                                                             \
    KeySpec{sec, name, false, [](OptConfig& c, const std::string& v) { c.field = to_bool(v); }, \
            [](const OptConfig& c) { return bool_text(c.field); }}

const std::vector<KeySpec>& key_table()
{
    static const std::vector<KeySpec> table = {
        {"domain", "nelx", true, [](OptConfig& c, const std::string& v) { c.domain.nelx = to_int(v); },
         [](const OptConfig& c) { return std::to_string(c.domain.nelx); }},
        {"domain", "nely", true, [](OptConfig& c, const std::string& v) { c.domain.nely = to_int(v); },
         [](const OptConfig& c) { return std::to_string(c.domain.nely); }},
        PNEUTOP_DOUBLE("domain", "elem_size", domain.elem_size),
        {"domain", "nds", false, [](OptConfig& c, const std::string& v) { c.domain.nds = to_rects(v); },
         [](const OptConfig& c) { return rects_text(c.domain.nds); }},
        {"domain", "ndv", false, [](OptConfig& c, const std::string& v) { c.domain.ndv = to_rects(v); },
         [](const OptConfig& c) { return rects_text(c.domain.ndv); }},
        {"domain", "inlet", true, [](OptConfig& c, const std::string& v) { c.domain.inlet = to_segments(v); },
         [](const OptConfig& c) { return segments_text(c.domain.inlet); }},
        {"domain", "ambient", true, [](OptConfig& c, const std::string& v) { c.domain.ambient = to_segments(v); },
         [](const OptConfig& c) { return segments_text(c.domain.ambient); }},
        {"domain", "fixed", true, [](OptConfig& c, const std::string& v) { c.domain.fixed = to_segments(v); },
         [](const OptConfig& c) { return segments_text(c.domain.fixed); }},
        {"domain", "symmetry", false, [](OptConfig& c, const std::string& v) { c.domain.symmetry = to_side(v); },
         [](const OptConfig& c) { return to_string(c.domain.symmetry); }},
        {"domain", "output_node", true,
         [](OptConfig& c, const std::string& v) {
             const auto w = words(v);
             if (w.size() != 2) throw KeyError("expected 'ix iy', got '" + v + "'");
             c.domain.output_ix = to_int(w[0]);
             c.domain.output_iy = to_int(w[1]);
         },
         [](const OptConfig& c) {
             return std::to_string(c.domain.output_ix) + " " + std::to_string(c.domain.output_iy);
         }},
        // Desired output motion; the selector l points the opposite way so
        // that minimizing l^T u drives the output in this direction.
        {"domain", "output_direction", true,
         [](OptConfig& c, const std::string& v) {
             if (v.size() != 2 || (v[0] != '+' && v[0] != '-') || (v[1] != 'x' && v[1] != 'y'))
                 throw KeyError("expected +x, -x, +y or -y, got '" + v + "'");
             c.domain.output_axis = v[1] == 'x' ? Axis::x : Axis::y;
             c.domain.output_sign = v[0] == '-' ? 1 : -1;
         },
         [](const OptConfig& c) {
             return std::string(c.domain.output_sign > 0 ? "-" : "+") + to_string(c.domain.output_axis);
         }},
        PNEUTOP_DOUBLE("domain", "spring_stiffness", domain.spring_stiffness),

        PNEUTOP_DOUBLE("material", "E0", simp.E0),
        PNEUTOP_DOUBLE("material", "E1", simp.E1),
        PNEUTOP_DOUBLE("material", "penalty", simp.penalty),
        PNEUTOP_DOUBLE("material", "nu", nu),

        PNEUTOP_DOUBLE("filter", "r_min", optimization.r_min),

        PNEUTOP_DOUBLE("projection", "delta_eta", optimization.delta_eta),
        PNEUTOP_DOUBLE("projection", "beta_init", optimization.beta_init),
        PNEUTOP_DOUBLE("projection", "beta_max", optimization.beta_max),
        PNEUTOP_INT("projection", "beta_interval", optimization.beta_interval),

        PNEUTOP_DOUBLE("flow", "K_v", flow.K_v),
        PNEUTOP_DOUBLE("flow", "epsilon", flow.epsilon),
        PNEUTOP_DOUBLE("flow", "eta_f", flow.eta_f),
        PNEUTOP_DOUBLE("flow", "beta_f", flow.beta_f),
        PNEUTOP_DOUBLE("flow", "r", flow.r),
        {"flow", "delta_s", false,
         [](OptConfig& c, const std::string& v) {
             if (v == "auto") c.delta_s.reset();
             else c.delta_s = to_double(v);
         },
         [](const OptConfig& c) { return c.delta_s ? format_double(*c.delta_s) : std::string("auto"); }},
        PNEUTOP_DOUBLE("flow", "p_in", flow.p_in),
        PNEUTOP_DOUBLE("flow", "p_0", flow.p_0),
        PNEUTOP_INT("flow", "drainage_exponent", flow.drainage_exponent),

        PNEUTOP_DOUBLE("optimization", "v_star", optimization.v_star),
        PNEUTOP_DOUBLE("optimization", "s_f", optimization.s_f),
        PNEUTOP_INT("optimization", "max_iter", optimization.max_iter),
        PNEUTOP_BOOL("optimization", "early_exit", optimization.early_exit),
        PNEUTOP_DOUBLE("optimization", "objective_scale", optimization.objective_scale),
        PNEUTOP_BOOL("optimization", "load_sensitivity", optimization.load_sensitivity),
        {"optimization", "seed", false,
         [](OptConfig& c, const std::string& v) { c.optimization.seed = to_u64(v); },
         [](const OptConfig& c) { return std::to_string(c.optimization.seed); }},

        PNEUTOP_DOUBLE("mma", "asyinit", mma.asyinit),
        PNEUTOP_DOUBLE("mma", "asydecr", mma.asydecr),
        PNEUTOP_DOUBLE("mma", "asyincr", mma.asyincr),
        PNEUTOP_DOUBLE("mma", "albefa", mma.albefa),
        PNEUTOP_DOUBLE("mma", "asymin", mma.asymin),
        PNEUTOP_DOUBLE("mma", "asymax", mma.asymax),
        PNEUTOP_DOUBLE("mma", "move", mma.move),
        PNEUTOP_DOUBLE("mma", "raa0", mma.raa0),
        PNEUTOP_DOUBLE("mma", "c", mma.c),
        PNEUTOP_DOUBLE("mma", "d", mma.d),
        PNEUTOP_DOUBLE("mma", "epsimin", mma.epsimin),

        {"output", "directory", false, [](OptConfig& c, const std::string& v) { c.output.directory = v; },
         [](const OptConfig& c) { return c.output.directory; }},
        PNEUTOP_INT("output", "snapshot_interval", output.snapshot_interval),
        PNEUTOP_BOOL("output", "vtk", output.vtk),
        PNEUTOP_BOOL("output", "contours", output.contours),

        PNEUTOP_INT("baseline", "wall", baseline.wall),
        {"baseline", "cavity", false,
         [](OptConfig& c, const std::string& v) { c.baseline.cavity = v.empty() ? ElementRect{} : to_rect(v); },
         [](const OptConfig& c) {
             return c.baseline.cavity == ElementRect{} ? std::string() : rect_text(c.baseline.cavity);
         }},
    };
    return table;
}

#undef PNEUTOP_DOUBLE
#undef PNEUTOP_INT
#undef PNEUTOP_BOOL

void require(bool ok, const std::string& key, const std::string& what)
{
    if (!ok) throw ConfigError(key + ": " + what);
}

} // namespace

void validate(const OptConfig& c)
{
    const auto& o = c.optimization;
    require(o.v_star > 0.0 && o.v_star <= 1.0, "optimization.v_star", "must lie in (0, 1]");
    require(o.s_f > 0.0 && o.s_f <= 1.0, "optimization.s_f", "must lie in (0, 1]");
    require(o.max_iter >= 0, "optimization.max_iter", "must be >= 0");
    require(o.objective_scale > 0.0, "optimization.objective_scale", "must be positive");
    require(o.r_min > 0.0, "filter.r_min", "must be positive");
    require(o.delta_eta >= 0.0 && o.delta_eta < 0.5, "projection.delta_eta", "must lie in [0, 0.5)");
    require(o.beta_init >= 1.0, "projection.beta_init", "must be >= 1");
    require(o.beta_max >= o.beta_init, "projection.beta_max", "must be >= beta_init");
    require(o.beta_interval >= 1, "projection.beta_interval", "must be >= 1");
    require(c.simp.E0 > 0.0, "material.E0", "must be positive");
    require(c.simp.E1 > c.simp.E0, "material.E1", "must exceed E0");
    require(c.simp.penalty >= 1.0, "material.penalty", "must be >= 1");
    require(c.nu >= 0.0 && c.nu < 0.5, "material.nu", "must lie in [0, 0.5)");
    require(!c.delta_s || *c.delta_s > 0.0, "flow.delta_s", "must be positive or auto");
    require(c.output.snapshot_interval >= 0, "output.snapshot_interval", "must be >= 0");
    require(!c.output.directory.empty(), "output.directory", "must not be empty");
    try {
        validate(c.physics().flow);
        validate(c.mma);
        (void)build_domain(c.domain);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
}

OptConfig parse_config_text(const std::string& text)
{
    boost::property_tree::ptree tree;
    std::istringstream is(text);
    try {
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }

    std::map<std::string, const KeySpec*> specs;
    for (const auto& s : key_table()) specs[s.section + "." + s.key] = &s;

    OptConfig config;
    std::vector<std::string> seen;
    for (const auto& [section, body] : tree) {
        if (body.empty())
            throw ConfigError(section + ": key outside of any [section] (or empty section name)");
        for (const auto& [key, value] : body) {
            const std::string path = section + "." + key;
            const auto it = specs.find(path);
            if (it == specs.end()) throw ConfigError(path + ": unknown key");
            if (!value.empty()) throw ConfigError(path + ": nested values are not supported");
            try {
                it->second->read(config, trim(value.data()));
            } catch (const KeyError& e) {
                throw ConfigError(path + ": " + e.what());
            }
            seen.push_back(path);
        }
    }

    std::string missing;
    for (const auto& s : key_table()) {
        const std::string path = s.section + "." + s.key;
        if (s.required && std::find(seen.begin(), seen.end(), path) == seen.end())
            missing += (missing.empty() ? "" : ", ") + path;
    }
    if (!missing.empty()) throw ConfigError("missing required keys: " + missing);

    validate(config);
    return config;
}

OptConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string echo_config(const OptConfig& config)
{
    std::ostringstream os;
    std::string section;
    for (const auto& s : key_table()) {
        if (s.section != section) {
            if (!section.empty()) os << '\n';
            section = s.section;
            os << '[' << section << "]\n";
        }
        os << s.key << " = " << s.write(config) << '\n';
    }
    return os.str();
}

} // namespace pneutop
