#include "tpfem/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace tpfem {

namespace {

std::string trim(const std::string& s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': malformed number '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError("config key '" + key + "': malformed number '" + v + "'");
    return out;
}

long parse_long(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    long out = 0;
    try {
        out = std::stol(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': malformed integer '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError("config key '" + key + "': malformed integer '" + v + "'");
    return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse)
{
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigError("config key '" + key + "': empty list entry");
        out.push_back(parse(key, item));
    }
    if (out.empty())
        throw ConfigError("config key '" + key + "': empty list");
    return out;
}

} // namespace

RunConfig parse_config(std::istream& in)
{
    RunConfig cfg;
    const std::map<std::string, std::function<void(const std::string&, const std::string&)>>
        setters = {
            {"n", [&cfg](const std::string& k, const std::string& v) {
                 cfg.n = static_cast<int>(parse_long(k, v));
             }},
            {"T_f", [&cfg](const std::string& k, const std::string& v) {
                 cfg.T_f = parse_double(k, v);
             }},
            {"dt", [&cfg](const std::string& k, const std::string& v) {
                 cfg.dt = parse_double(k, v);
             }},
            {"tol", [&cfg](const std::string& k, const std::string& v) {
                 cfg.tol = parse_double(k, v);
             }},
            {"max_iters", [&cfg](const std::string& k, const std::string& v) {
                 cfg.max_iters = static_cast<int>(parse_long(k, v));
             }},
            {"case", [&cfg](const std::string&, const std::string& v) {
                 cfg.case_name = v;
             }},
            {"output_dir", [&cfg](const std::string&, const std::string& v) {
                 cfg.output_dir = v;
             }},
            {"seed", [&cfg](const std::string& k, const std::string& v) {
                 cfg.seed = static_cast<unsigned>(parse_long(k, v));
             }},
            {"levels", [&cfg](const std::string& k, const std::string& v) {
                 cfg.levels = parse_list<int>(k, v, [](const std::string& kk,
                                                      const std::string& vv) {
                     return static_cast<int>(parse_long(kk, vv));
                 });
             }},
            {"dt_over_h", [&cfg](const std::string& k, const std::string& v) {
                 cfg.dt_over_h = parse_double(k, v);
             }},
            {"s_values", [&cfg](const std::string& k, const std::string& v) {
                 cfg.s_values = parse_list<double>(k, v, parse_double);
             }},
            {"a0", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.a0 = parse_double(k, v);
             }},
            {"b0", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.b0 = parse_double(k, v);
             }},
            {"c0", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.c0 = parse_double(k, v);
             }},
            {"alpha", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.alpha = parse_double(k, v);
             }},
            {"beta", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.beta = parse_double(k, v);
             }},
            {"mu", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.mu = parse_double(k, v);
             }},
            {"lambda", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.lambda = parse_double(k, v);
             }},
            {"K11", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.K(0, 0) = parse_double(k, v);
             }},
            {"K12", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.K(0, 1) = cfg.params.K(1, 0) = parse_double(k, v);
             }},
            {"K22", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.K(1, 1) = parse_double(k, v);
             }},
            {"Theta11", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.Theta(0, 0) = parse_double(k, v);
             }},
            {"Theta12", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.Theta(0, 1) = cfg.params.Theta(1, 0) = parse_double(k, v);
             }},
            {"Theta22", [&cfg](const std::string& k, const std::string& v) {
                 cfg.params.Theta(1, 1) = parse_double(k, v);
             }},
        };

    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no)
                              + ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError("config line " + std::to_string(line_no)
                              + ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError("config line " + std::to_string(line_no)
                              + ": duplicate key '" + key + "'");
        it->second(key, value);
    }

    if (cfg.n < 1)
        throw ConfigError("config key 'n': must be >= 1");
    if (!(cfg.T_f > 0.0))
        throw ConfigError("config key 'T_f': must be > 0");
    if (!(cfg.dt > 0.0))
        throw ConfigError("config key 'dt': must be > 0");
    if (!(cfg.tol > 0.0))
        throw ConfigError("config key 'tol': must be > 0");
    if (cfg.max_iters < 1)
        throw ConfigError("config key 'max_iters': must be >= 1");
    if (!(cfg.dt_over_h > 0.0))
        throw ConfigError("config key 'dt_over_h': must be > 0");
    if (cfg.case_name != "mms" && cfg.case_name != "zero")
        throw ConfigError("config key 'case': must be 'mms' or 'zero'");
    for (int lvl : cfg.levels)
        if (lvl < 1)
            throw ConfigError("config key 'levels': entries must be >= 1");
    return cfg;
}

RunConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

void write_config(const RunConfig& cfg, std::ostream& os, const std::string& prefix)
{
    const auto old_precision = os.precision(17);
    const auto list_int = [](const std::vector<int>& v) {
        std::ostringstream ss;
        for (std::size_t i = 0; i < v.size(); ++i)
            ss << (i ? "," : "") << v[i];
        return ss.str();
    };
    const auto list_double = [](const std::vector<double>& v) {
        std::ostringstream ss;
        ss.precision(17);
        for (std::size_t i = 0; i < v.size(); ++i)
            ss << (i ? "," : "") << v[i];
        return ss.str();
    };
    os << prefix << "n=" << cfg.n << "\n"
       << prefix << "T_f=" << cfg.T_f << "\n"
       << prefix << "dt=" << cfg.dt << "\n"
       << prefix << "tol=" << cfg.tol << "\n"
       << prefix << "max_iters=" << cfg.max_iters << "\n"
       << prefix << "case=" << cfg.case_name << "\n"
       << prefix << "output_dir=" << cfg.output_dir << "\n"
       << prefix << "seed=" << cfg.seed << "\n"
       << prefix << "levels=" << list_int(cfg.levels) << "\n"
       << prefix << "dt_over_h=" << cfg.dt_over_h << "\n"
       << prefix << "s_values=" << list_double(cfg.s_values) << "\n"
       << prefix << "a0=" << cfg.params.a0 << "\n"
       << prefix << "b0=" << cfg.params.b0 << "\n"
       << prefix << "c0=" << cfg.params.c0 << "\n"
       << prefix << "alpha=" << cfg.params.alpha << "\n"
       << prefix << "beta=" << cfg.params.beta << "\n"
       << prefix << "mu=" << cfg.params.mu << "\n"
       << prefix << "lambda=" << cfg.params.lambda << "\n"
       << prefix << "K11=" << cfg.params.K(0, 0) << "\n"
       << prefix << "K12=" << cfg.params.K(0, 1) << "\n"
       << prefix << "K22=" << cfg.params.K(1, 1) << "\n"
       << prefix << "Theta11=" << cfg.params.Theta(0, 0) << "\n"
       << prefix << "Theta12=" << cfg.params.Theta(0, 1) << "\n"
       << prefix << "Theta22=" << cfg.params.Theta(1, 1) << "\n";
    os.precision(old_precision);
}

} // namespace tpfem
