#include "bandsing/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace bandsing {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        if (!out.empty()) out += '\n';
        out += l;
    }
    return out;
}

std::uint64_t parse_u64(const std::string& text) {
    if (auto caret = text.find('^'); caret != std::string::npos) {
        if (trim(text.substr(0, caret)) != "2") throw std::invalid_argument("only powers of two may use '^'");
        const auto k = parse_u64(trim(text.substr(caret + 1)));
        if (k > 63) throw std::invalid_argument("2^" + std::to_string(k) + " does not fit in 64 bits");
        return std::uint64_t{1} << k;
    }
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end) throw std::invalid_argument("expected a non-negative integer");
    return v;
}

Fraction parse_fraction(const std::string& text) {
    if (text.find_first_of(".eE") != std::string::npos)
        throw std::invalid_argument("write rationals exactly, e.g. 1/4");
    return Fraction::parse(text);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
    static const std::map<std::string, std::map<std::string, Setter>> s{
        {"profile",
         {
             {"kind", [](ExperimentConfig& c, const std::string& v) { c.kind = parse_ensemble_kind(v); }},
             {"d",
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "auto")
                      c.d.reset();
                  else
                      c.d = parse_u64(v);
              }},
             {"offband", [](ExperimentConfig& c, const std::string& v) { c.offband = EntryLaw::parse(v); }},
         }},
        {"campaign",
         {
             {"n_list",
              [](ExperimentConfig& c, const std::string& v) {
                  c.n_list.clear();
                  std::stringstream ss(v);
                  std::string item;
                  while (std::getline(ss, item, ',')) c.n_list.push_back(parse_u64(trim(item)));
              }},
             {"alpha", [](ExperimentConfig& c, const std::string& v) { c.alpha = parse_fraction(v); }},
             {"trials", [](ExperimentConfig& c, const std::string& v) { c.trials = parse_u64(v); }},
             {"master_seed", [](ExperimentConfig& c, const std::string& v) { c.master_seed = parse_u64(v); }},
             {"threads",
              [](ExperimentConfig& c, const std::string& v) { c.threads = static_cast<unsigned>(parse_u64(v)); }},
         }},
        {"constants",
         {
             {"rho", [](ExperimentConfig& c, const std::string& v) { c.rho = parse_fraction(v); }},
             {"tau", [](ExperimentConfig& c, const std::string& v) { c.tau = parse_fraction(v); }},
             {"mu",
              [](ExperimentConfig& c, const std::string& v) {
                  parse_fraction(v);
                  c.mu = StepLaw::parse(v);
              }},
             {"K", [](ExperimentConfig& c, const std::string& v) { c.K = parse_u64(v); }},
         }},
        {"prime",
         {
             {"policy",
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "fixed")
                      c.prime.kind = PrimePolicy::Kind::fixed;
                  else if (v == "choose")
                      c.prime.kind = PrimePolicy::Kind::choose;
                  else if (v == "integer")
                      c.prime.kind = PrimePolicy::Kind::integer;
                  else
                      throw std::invalid_argument("expected fixed, choose or integer");
              }},
             {"p", [](ExperimentConfig& c, const std::string& v) { c.prime.p = parse_u64(v); }},
             {"cap", [](ExperimentConfig& c, const std::string& v) { c.prime.cap = parse_u64(v); }},
         }},
        {"row",
         {
             {"policy",
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "fixed")
                      c.row.kind = RowPolicy::Kind::fixed;
                  else if (v == "uniform")
                      c.row.kind = RowPolicy::Kind::uniform;
                  else if (v == "center")
                      c.row.kind = RowPolicy::Kind::center;
                  else
                      throw std::invalid_argument("expected fixed, uniform or center");
              }},
             {"index", [](ExperimentConfig& c, const std::string& v) { c.row.index = parse_u64(v); }},
         }},
    };
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> list) : std::runtime_error(join(list)), problems(std::move(list)) {}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::vector<std::string> problems;
    std::set<std::pair<std::string, std::string>> seen;
    std::string section, line;
    std::size_t number = 0;

    while (std::getline(in, line)) {
        ++number;
        const std::string where = "line " + std::to_string(number) + ": ";
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                problems.push_back(where + "malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section)) problems.push_back(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back(where + "expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            problems.push_back(where + "key '" + key + "' appears before any section");
            continue;
        }
        auto sec = schema().find(section);
        if (sec == schema().end()) continue;  // already reported
        auto setter = sec->second.find(key);
        if (setter == sec->second.end()) {
            problems.push_back(where + "unknown key '" + key + "' in [" + section + "]");
            continue;
        }
        if (!seen.insert({section, key}).second) {
            problems.push_back(where + "duplicate key '" + key + "' in [" + section + "]");
            continue;
        }
        try {
            setter->second(cfg, value);
        } catch (const std::exception& e) {
            problems.push_back(where + section + "." + key + " = '" + value + "': " + e.what());
        }
    }
    for (auto& p : cfg.problems()) problems.push_back(std::move(p));
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file " + path.string()});
    return parse_config(in);
}

std::string render_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "[profile]\n"
        << "kind = " << to_string(cfg.kind) << '\n'
        << "d = " << (cfg.d ? std::to_string(*cfg.d) : std::string("auto")) << '\n'
        << "offband = " << cfg.offband.str() << '\n'
        << "\n[campaign]\n"
        << "n_list = ";
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) out << (i ? ", " : "") << cfg.n_list[i];
    out << '\n'
        << "alpha = " << cfg.alpha.str() << '\n'
        << "trials = " << cfg.trials << '\n'
        << "master_seed = " << cfg.master_seed << '\n'
        << "threads = " << cfg.threads << '\n'
        << "\n[constants]\n"
        << "rho = " << cfg.rho.str() << '\n'
        << "tau = " << cfg.tau.str() << '\n'
        << "mu = " << cfg.mu.str() << '\n'
        << "K = " << cfg.K << '\n'
        << "\n[prime]\n"
        << "policy = " << to_string(cfg.prime.kind) << '\n'
        << "p = " << cfg.prime.p << '\n'
        << "cap = " << cfg.prime.cap << '\n'
        << "\n[row]\n"
        << "policy = " << to_string(cfg.row.kind) << '\n'
        << "index = " << cfg.row.index << '\n';
    return out.str();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.kind == b.kind && a.d == b.d && a.offband == b.offband && a.n_list == b.n_list && a.alpha == b.alpha &&
           a.rho == b.rho && a.tau == b.tau && a.mu == b.mu && a.K == b.K && a.prime == b.prime &&
           a.trials == b.trials && a.master_seed == b.master_seed && a.row == b.row && a.threads == b.threads;
}

}  // namespace bandsing
