#include "volclust/config.hpp"

#include "volclust/csv.hpp"
#include "volclust/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>

namespace volclust {

namespace pt = boost::property_tree;

namespace {

double parse_number(const std::string& text, const std::string& what) {
    std::string s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data() + start, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || start == s.size()) {
        throw ConfigError(what + ": not a number: '" + text + "'");
    }
    return v;
}

const std::map<std::string, std::set<std::string>> kSchema = {
    {"model", {"b", "sigma1", "sigma2", "m", "rho", "epsilon"}},
    {"driver", {"eta", "gamma"}},
    {"option", {"strike", "maturity"}},
};

} // namespace

CoefficientFunction parse_coefficient(const std::string& text,
                                      const std::filesystem::path& base_dir) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ConfigError("coefficient '" + text +
                          "' must be constant:<v>, atan:<base>,<amp> or table:<path>");
    }
    const std::string kind = text.substr(0, colon);
    const std::string arg = text.substr(colon + 1);
    if (kind == "constant") {
        return CoefficientFunction::constant(parse_number(arg, "constant coefficient"));
    }
    if (kind == "atan") {
        const auto comma = arg.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("atan coefficient needs '<base>,<amp>', got '" + arg + "'");
        }
        return CoefficientFunction::arctangent(parse_number(arg.substr(0, comma), "atan base"),
                                               parse_number(arg.substr(comma + 1), "atan amp"));
    }
    if (kind == "table") {
        std::filesystem::path path(arg);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        const auto table = csv::read(path);
        if (table.header.size() != 2) {
            throw ConfigError(path.string() + ": table needs exactly two columns y,value");
        }
        std::vector<double> ys, vs;
        for (const auto& row : table.rows) {
            ys.push_back(row[0]);
            vs.push_back(row[1]);
        }
        return CoefficientFunction::tabulated(std::move(ys), std::move(vs), arg);
    }
    throw ConfigError("unknown coefficient kind '" + kind + "'");
}

ModelSpec parse_model_config(std::istream& is, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    for (const auto& [section, body] : tree) {
        auto it = kSchema.find(section);
        if (it == kSchema.end()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) {
                throw ConfigError("unknown key '" + key + "' in [" + section + "]");
            }
        }
    }

    auto get = [&](const std::string& section, const std::string& key) -> std::string {
        auto v = tree.get_optional<std::string>(section + "." + key);
        if (!v) throw ConfigError("config is missing [" + section + "] " + key);
        return *v;
    };
    auto number = [&](const std::string& section, const std::string& key) {
        return parse_number(get(section, key), "[" + section + "] " + key);
    };

    ModelSpec spec;
    spec.b = parse_coefficient(get("model", "b"), base_dir);
    spec.sigma1 = parse_coefficient(get("model", "sigma1"), base_dir);
    spec.sigma2 = parse_coefficient(get("model", "sigma2"), base_dir);
    spec.m = number("model", "m");
    spec.rho = number("model", "rho");
    spec.epsilon = number("model", "epsilon");
    spec.eta = number("driver", "eta");
    spec.gamma = number("driver", "gamma");
    spec.strike = number("option", "strike");
    spec.maturity = number("option", "maturity");
    return spec;
}

ModelSpec load_model_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_model_config(in, path.parent_path());
}

void write_model_config(std::ostream& os, const ModelSpec& spec) {
    os << "[model]\n"
       << "b = " << spec.b.describe() << '\n'
       << "sigma1 = " << spec.sigma1.describe() << '\n'
       << "sigma2 = " << spec.sigma2.describe() << '\n'
       << "m = " << csv::format(spec.m) << '\n'
       << "rho = " << csv::format(spec.rho) << '\n'
       << "epsilon = " << csv::format(spec.epsilon) << '\n'
       << "\n[driver]\n"
       << "eta = " << csv::format(spec.eta) << '\n'
       << "gamma = " << csv::format(spec.gamma) << '\n'
       << "\n[option]\n"
       << "strike = " << csv::format(spec.strike) << '\n'
       << "maturity = " << csv::format(spec.maturity) << '\n';
}

} // namespace volclust
