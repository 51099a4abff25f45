#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "bandsing/config.hpp"
#include "bandsing/ensembles.hpp"
#include "bandsing/experiments.hpp"
#include "bandsing/lotools.hpp"
#include "bandsing/matrix_io.hpp"
#include "bandsing/rankengine.hpp"

namespace bandsing::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::string item;
    std::string normalized = text;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::istringstream in(normalized);
    while (in >> item) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoll(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw UsageError("bad integer '" + item + "' in vector");
        }
    }
    return out;
}

std::vector<std::int64_t> read_vector(const std::string& literal, const std::string& file) {
    if (!literal.empty() && !file.empty()) throw UsageError("give either --v or --file, not both");
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot open " + file);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_int_list(ss.str());
    }
    return parse_int_list(literal);
}

std::vector<u64> residues(const std::vector<std::int64_t>& v, PrimeModulus p) {
    std::vector<u64> out;
    for (auto x : v) out.push_back(residue(x, p));
    return out;
}

PrimeModulus prime_arg(u64 p) {
    if (p < 3 || p >= kMaxModulus || !is_prime(p)) throw UsageError(std::to_string(p) + " is not an odd prime below 2^62");
    return PrimeModulus(p);
}

StepLaw law_arg(const std::string& text) {
    if (text.find_first_of(".eE") != std::string::npos) throw UsageError("enter mu exactly, e.g. 1/4");
    try {
        return StepLaw::parse(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

fs::path campaign_dir(const std::string& out, const std::string& command, const fs::path& config) {
    if (!out.empty()) return out;
    const char* root = std::getenv("BANDSING_OUT");
    return fs::path(root && *root ? root : "runs") / (command + "-" + config.stem().string());
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path.string());
}

json base_manifest(const std::string& command, const ExperimentConfig& cfg, const fs::path& config_path,
                   const std::vector<std::string>& warnings) {
    json m;
    m["tool"] = "bandsing";
    m["version"] = kVersion;
    m["command"] = command;
    m["config_file"] = config_path.string();
    m["config"] = to_json(cfg);
    m["config_text"] = render_config(cfg);
    m["master_seed"] = cfg.master_seed;
    m["threads"] = cfg.threads;
    m["warnings"] = warnings;
    m["started"] = utc_now();
    return m;
}

ExperimentConfig load_campaign_config(const std::string& path, unsigned threads, std::ostream& err,
                                      std::vector<std::string>& warnings) {
    ExperimentConfig cfg = load_config(path);
    if (threads > 0) cfg.threads = threads;
    warnings = cfg.warnings();
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    return cfg;
}

// ---- gen ------------------------------------------------------------------

struct GenArgs {
    std::string kind = "general";
    std::size_t n = 0;
    std::size_t d = 0;
    std::string offband = "zero";
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "text";
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
    BandProfile profile;
    try {
        profile.n = a.n;
        profile.d = a.d;
        profile.kind = parse_ensemble_kind(a.kind);
        profile.offband = EntryLaw::parse(a.offband);
        profile.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const IntegerMatrix m = sample_matrix(profile, a.seed);
    save_matrix(a.out, m, a.format == "binary" ? MatrixFormat::binary : MatrixFormat::text);

    std::size_t random = 0, nonzero = 0;
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t j = 0; j < a.n; ++j) {
            random += in_random_support(profile, i, j) ? 1 : 0;
            nonzero += m(i, j) != 0 ? 1 : 0;
        }
    out << "wrote " << a.out << ": " << a.n << "x" << a.n << " " << to_string(profile.kind) << " d=" << a.d
        << " offband=" << profile.offband.str() << " random_entries=" << random << " nonzero=" << nonzero << '\n';
    return kOk;
}

// ---- rank -----------------------------------------------------------------

struct RankArgs {
    std::string path;
    u64 prime = 0;
    bool integer = false;
    bool kernel = false;
};

int cmd_rank(const RankArgs& a, std::ostream& out) {
    if (a.prime && a.integer) throw UsageError("give either --prime or --integer, not both");
    const StoredMatrix stored = load_matrix(a.path);
    const IntegerMatrix& m = stored.entries;
    std::optional<u64> p;
    if (a.prime)
        p = a.prime;
    else if (!a.integer)
        p = stored.modulus;

    if (!p) {
        if (a.kernel) throw UsageError("--kernel needs a prime field");
        const std::size_t r = rank_Z(m);
        out << "field Z\nrank " << r << '\n';
        if (m.square()) out << "singular " << (r < m.rows() ? "yes" : "no") << '\n';
        out << "kernel_dim " << m.cols() - r << '\n';
        return kOk;
    }
    const PrimeModulus q = prime_arg(*p);
    const FpMatrix f = reduce_mod(m, q);
    const std::size_t r = rank_fp(f);
    out << "field F_" << q.value() << "\nrank " << r << '\n';
    if (m.square()) out << "singular " << (r < m.rows() ? "yes" : "no") << '\n';
    out << "kernel_dim " << m.cols() - r << '\n';
    if (a.kernel) write_kernel_text(out, kernel_fp(f));
    return kOk;
}

// ---- rho ------------------------------------------------------------------

struct RhoArgs {
    std::string v;
    std::string file;
    std::string mu = "1";
    u64 prime = 0;
    bool neighborhood = false;
    bool estimate = false;
    bool floating = false;
    bool pmf = false;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
};

int cmd_rho(const RhoArgs& a, std::ostream& out) {
    const PrimeModulus p = prime_arg(a.prime);
    const StepLaw law = law_arg(a.mu);
    const std::vector<u64> v = residues(read_vector(a.v, a.file), p);
    const WalkOptions defaults;
    out << "support " << support_size(v, p.value()) << '\n';

    if (a.estimate) {
        const CollisionEstimate est = collision_estimate_rho(v, law, p, a.trials, a.seed);
        out << "rho_lower " << est.lower << "\nrho_upper " << est.upper << "\nq_hat " << est.q_hat << "\nmodal "
            << est.modal << '\n';
        return kOk;
    }
    if (p.value() > defaults.dense_threshold && !a.floating)
        throw UsageError("p exceeds the exact pmf threshold 2^22; use --estimate or --float");

    WalkOptions options;
    options.mode = a.floating ? MassMode::floating : MassMode::exact;
    const MassFunction f = walk_distribution(v, law, p, options);
    u64 argmax = 0;
    if (a.floating) {
        const double rho = f.max_mass_approx(&argmax);
        out << "rho " << rho << "\nerror_bound " << f.error_bound() << '\n';
    } else {
        const Dyadic rho = f.max_mass(&argmax);
        out << "rho " << rho.str() << "\nrho_approx " << rho.to_double() << '\n';
    }
    out << "argmax " << argmax << '\n';
    if (a.neighborhood) {
        out << "neighborhood";
        for (u64 x : f.half_zero_level_set()) out << ' ' << x;
        out << '\n';
    }
    if (a.pmf && !a.floating) write_pmf(out, f);
    return kOk;
}

// ---- lo-witness -----------------------------------------------------------

struct WitnessArgs {
    std::string v;
    std::string file;
    std::string mu = "1/4";
    u64 prime = 0;
    std::uint64_t budget = WitnessOptions{}.budget;
};

int cmd_lo_witness(const WitnessArgs& a, std::ostream& out) {
    const PrimeModulus p = prime_arg(a.prime);
    const StepLaw law = law_arg(a.mu);
    const std::vector<u64> v = residues(read_vector(a.v, a.file), p);
    WitnessOptions options;
    options.budget = a.budget;
    const WitnessSearch search = find_lo_witness(v, law, p, options);

    json j;
    j["outcome"] = to_string(search.outcome);
    j["evaluated"] = search.evaluated;
    if (search.witness) {
        const LOWitness& w = *search.witness;
        j["witness"] = {{"T", w.T},
                        {"w", w.w},
                        {"N", w.N},
                        {"exceptional", w.exceptional},
                        {"D", w.D},
                        {"rho", w.rho.str()}};
        j["verified"] = verify_witness(v, law, p, w);
    }
    out << j.dump(2) << '\n';
    return search.witness ? kOk : kRuntimeError;
}

// ---- singprob -------------------------------------------------------------

struct CampaignArgs {
    std::string config;
    std::string out;
    unsigned threads = 0;
};

int cmd_singprob(const CampaignArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<std::string> warnings;
    const ExperimentConfig cfg = load_campaign_config(a.config, a.threads, err, warnings);
    const fs::path dir = campaign_dir(a.out, "singprob", a.config);
    fs::create_directories(dir);
    json manifest = base_manifest("singprob", cfg, a.config, warnings);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<SingularityRecord> records;
    const auto cells = estimate_singularity_probability(cfg, &records);

    std::ostringstream jsonl, summary, fit_csv;
    write_jsonl(jsonl, records);
    write_summary_csv(summary, cells);
    write_file(dir / "records.jsonl", jsonl.str());
    write_file(dir / "summary.csv", summary.str());
    json outputs = {"records.jsonl", "summary.csv"};

    std::vector<ScalingPoint> points;
    for (const auto& c : cells) points.push_back({c.n, c.censored ? c.bound : c.p_hat, c.censored});
    try {
        const ScalingFit fit = fit_scaling(points, cfg.alpha.value());
        write_fit_csv(fit_csv, fit);
        write_file(dir / "fit.csv", fit_csv.str());
        outputs.push_back("fit.csv");
        manifest["fit"] = {{"C", fit.C}, {"r_squared", fit.r_squared}};
        out << "fit C=" << fit.C << " r2=" << fit.r_squared << '\n';
    } catch (const std::invalid_argument& e) {
        manifest["fit"] = {{"skipped", e.what()}};
    }

    json clamped = json::array();
    for (const auto& c : cells) {
        if (c.prime_clamped) clamped.push_back(c.n);
        out << "n=" << c.n << " p=" << (c.p ? std::to_string(*c.p) : "Z") << " trials=" << c.trials
            << " singular=" << c.singular << " P_hat=" << c.p_hat << " ci=[" << c.ci.lo << ", " << c.ci.hi << "]"
            << (c.censored ? " censored bound=" + std::to_string(c.bound) : "") << '\n';
    }
    manifest["flags"] = {{"prime_clamped", clamped}, {"partition_fallback", json::array()}};
    manifest["outputs"] = outputs;
    manifest["finished"] = utc_now();
    manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    out << "campaign written to " << dir.string() << '\n';
    return kOk;
}

// ---- kernel-survey --------------------------------------------------------

int cmd_kernel_survey(const CampaignArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<std::string> warnings;
    const ExperimentConfig cfg = load_campaign_config(a.config, a.threads, err, warnings);
    if (cfg.prime.kind == PrimePolicy::Kind::integer) throw UsageError("kernel-survey needs prime.policy fixed or choose");
    for (std::size_t n : cfg.n_list)
        if (cfg.prime_for(n)->p.value() > WalkOptions{}.dense_threshold)
            throw UsageError("prime for n = " + std::to_string(n) +
                             " exceeds the exact pmf threshold 2^22; lower prime.cap");
    const fs::path dir = campaign_dir(a.out, "kernel-survey", a.config);
    fs::create_directories(dir);
    json manifest = base_manifest("kernel-survey", cfg, a.config, warnings);
    const auto t0 = std::chrono::steady_clock::now();

    const auto records = kernel_structure_survey(cfg);
    const auto rows = summarize_survey(records);

    std::ostringstream jsonl, summary;
    write_jsonl(jsonl, records);
    write_survey_csv(summary, rows);
    write_file(dir / "records.jsonl", jsonl.str());
    write_file(dir / "summary.csv", summary.str());
    json outputs = {"records.jsonl", "summary.csv"};

    std::vector<ScalingPoint> points;
    for (const auto& r : rows) points.push_back({r.n, r.median_home_rho, false});
    try {
        const ScalingFit fit = fit_scaling(points, cfg.alpha.value());
        std::ostringstream fit_csv;
        write_fit_csv(fit_csv, fit);
        write_file(dir / "fit.csv", fit_csv.str());
        outputs.push_back("fit.csv");
        manifest["fit"] = {{"tau_hat", fit.C}, {"r_squared", fit.r_squared}};
        out << "fit tau_hat=" << fit.C << " r2=" << fit.r_squared << '\n';
    } catch (const std::invalid_argument& e) {
        manifest["fit"] = {{"skipped", e.what()}};
    }

    json clamped = json::array(), fallback = json::array();
    for (std::size_t n : cfg.n_list) {
        if (cfg.prime_for(n)->clamped) clamped.push_back(n);
        if (partition_intervals(n, cfg.bandwidth_for(n)).fallback) fallback.push_back(n);
    }
    for (const auto& r : rows)
        out << "n=" << r.n << " p=" << r.p << " trials=" << r.trials << " min_kernel_dim=" << r.min_kernel_dim
            << " conclusion_fraction=" << r.conclusion_fraction << " median_home_rho=" << r.median_home_rho << '\n';
    manifest["flags"] = {{"prime_clamped", clamped}, {"partition_fallback", fallback}};
    manifest["outputs"] = outputs;
    manifest["finished"] = utc_now();
    manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    out << "campaign written to " << dir.string() << '\n';
    return kOk;
}

// ---- check ----------------------------------------------------------------

const std::regex kDyadicText(R"(^(0|1|[1-9][0-9]*/[1-9][0-9]*)$)");
const std::regex kCaseText(R"(^(SMALL_SUPPORT|SMALL_SUPPORT_ZERO|STRONG_ANTICONC|DYADIC\([0-9]+\))$)");

void require(std::vector<std::string>& problems, const std::string& where, bool ok, const std::string& what) {
    if (!ok) problems.push_back(where + ": " + what);
}

bool has_uint(const json& j, const char* key) { return j.contains(key) && j[key].is_number_unsigned(); }

void check_singprob_record(const json& j, const std::string& where, std::vector<std::string>& problems) {
    require(problems, where, j.is_object() && j.size() == 5, "expected exactly trial, seed, n, p, singular");
    if (!j.is_object()) return;
    for (const char* key : {"trial", "seed", "n"}) require(problems, where, has_uint(j, key), std::string(key) + " must be an unsigned integer");
    require(problems, where, j.contains("p") && (j["p"].is_number_unsigned() || j["p"] == "Z"), "p must be a prime or \"Z\"");
    require(problems, where, j.contains("singular") && j["singular"].is_boolean(), "singular must be a boolean");
}

void check_survey_record(const json& j, const std::string& where, std::vector<std::string>& problems) {
    if (!j.is_object()) {
        problems.push_back(where + ": record is not an object");
        return;
    }
    const std::size_t before = problems.size();
    for (const char* key : {"trial", "seed", "n", "d", "p", "row", "home_block", "kernel_dim"})
        require(problems, where, has_uint(j, key), std::string(key) + " must be an unsigned integer");
    for (const char* key : {"prime_clamped", "singular"})
        require(problems, where, j.contains(key) && j[key].is_boolean(), std::string(key) + " must be a boolean");
    const bool part_ok = j.contains("partition") && j["partition"].is_object() && has_uint(j["partition"], "count") &&
                         has_uint(j["partition"], "e") && j["partition"].contains("s") &&
                         j["partition"]["s"].is_number() && j["partition"].contains("fallback") &&
                         j["partition"]["fallback"].is_boolean();
    require(problems, where, part_ok, "partition must hold e, s, fallback and count");
    require(problems, where, j.contains("vectors") && j["vectors"].is_array(), "vectors must be an array");
    if (problems.size() != before) return;

    const auto count = j["partition"]["count"].get<std::size_t>();
    const auto n = j["n"].get<std::size_t>();
    require(problems, where, j["row"].get<std::size_t>() < n, "row outside [0, n)");
    require(problems, where, j["home_block"].get<std::size_t>() < count, "home_block outside the partition");
    require(problems, where, j["kernel_dim"].get<std::size_t>() >= 1, "kernel of a row-deleted matrix cannot be trivial");
    require(problems, where, j["vectors"].size() == j["kernel_dim"].get<std::size_t>(), "one survey per basis vector expected");
    for (const auto& v : j["vectors"]) {
        const bool shape = v.is_object() && v.contains("blocks") && v["blocks"].is_array() && v.contains("home_rho") &&
                           v["home_rho"].is_string() && v.contains("conclusion") && v["conclusion"].is_boolean();
        require(problems, where, shape, "vector survey must hold blocks, home_rho and conclusion");
        if (!shape) continue;
        require(problems, where, std::regex_match(v["home_rho"].get<std::string>(), kDyadicText), "home_rho is not a dyadic");
        require(problems, where, v["blocks"].size() == count, "block count differs from the partition");
        std::size_t k = 0;
        for (const auto& b : v["blocks"]) {
            const bool ok = b.is_object() && has_uint(b, "k") && b["k"] == k && has_uint(b, "support") &&
                            b.contains("rho") && b["rho"].is_string() &&
                            std::regex_match(b["rho"].get<std::string>(), kDyadicText) && b.contains("rho_mu") &&
                            b["rho_mu"].is_string() && std::regex_match(b["rho_mu"].get<std::string>(), kDyadicText) &&
                            b.contains("case") && b["case"].is_string() &&
                            std::regex_match(b["case"].get<std::string>(), kCaseText) && b.contains("t") &&
                            b["t"].is_number_integer();
            require(problems, where, ok, "block " + std::to_string(k) + " is malformed");
            ++k;
        }
    }
}

std::vector<std::string> check_jsonl(const fs::path& path) {
    std::vector<std::string> problems;
    std::ifstream in(path);
    if (!in) return {path.string() + ": cannot open"};
    std::string line;
    std::size_t number = 0;
    int kind = -1;  // 0 singprob, 1 survey
    while (std::getline(in, line)) {
        ++number;
        const std::string where = path.string() + ":" + std::to_string(number);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            problems.push_back(where + ": invalid JSON");
            continue;
        }
        if (kind < 0) kind = j.is_object() && j.contains("vectors") ? 1 : 0;
        if (kind == 0)
            check_singprob_record(j, where, problems);
        else
            check_survey_record(j, where, problems);
        if (problems.size() > 20) break;
    }
    return problems;
}

std::vector<std::string> check_csv(const fs::path& path) {
    static const std::vector<std::string> headers{
        "n,p,trials,singular_count,P_hat,ci_lo,ci_hi,censored",
        "n,p,trials,min_kernel_dim,conclusion_fraction,median_home_rho",
        "n,x,log_inv_value,censored,residual,consistent",
    };
    std::ifstream in(path);
    if (!in) return {path.string() + ": cannot open"};
    std::string header;
    std::getline(in, header);
    if (std::find(headers.begin(), headers.end(), header) == headers.end())
        return {path.string() + ": unknown header '" + header + "'"};
    const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
    std::vector<std::string> problems;
    std::string line;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        std::istringstream ls(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            ++c;
            char* end = nullptr;
            std::strtod(cell.c_str(), &end);
            const bool numeric = !cell.empty() && end == cell.c_str() + cell.size();
            if (!numeric && cell != "Z")
                problems.push_back(path.string() + ":" + std::to_string(number) + ": non-numeric cell '" + cell + "'");
        }
        if (c != columns) problems.push_back(path.string() + ":" + std::to_string(number) + ": wrong column count");
    }
    return problems;
}

std::vector<std::string> check_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return {path.string() + ": cannot open"};
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception&) {
        return {path.string() + ": invalid JSON"};
    }
    std::vector<std::string> problems;
    const std::string where = path.string();
    for (const char* key : {"tool", "version", "command", "config_text", "started", "finished"})
        require(problems, where, m.contains(key) && m[key].is_string(), std::string(key) + " must be a string");
    require(problems, where, has_uint(m, "master_seed"), "master_seed must be an unsigned integer");
    require(problems, where, m.contains("config") && m["config"].is_object(), "config must be an object");
    require(problems, where, m.contains("outputs") && m["outputs"].is_array(), "outputs must be an array");
    require(problems, where, m.contains("flags") && m["flags"].is_object(), "flags must be an object");
    if (problems.empty()) {
        try {
            std::istringstream text(m["config_text"].get<std::string>());
            parse_config(text);
        } catch (const ConfigError& e) {
            problems.push_back(where + ": config_text does not parse: " + e.what());
        }
        for (const auto& o : m["outputs"])
            if (!o.is_string() || !fs::exists(path.parent_path() / o.get<std::string>()))
                problems.push_back(where + ": listed output " + o.dump() + " is missing");
    }
    return problems;
}

std::vector<std::string> check_matrix_or_kernel(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {path.string() + ": cannot open"};
    std::string head;
    in >> head;
    try {
        if (head == "kernel") {
            std::ifstream k(path);
            read_kernel_text(k);
        } else {
            load_matrix(path);
        }
    } catch (const std::exception& e) {
        return {path.string() + ": " + e.what()};
    }
    return {};
}

}  // namespace

std::vector<std::string> check_path(const fs::path& path) {
    if (fs::is_directory(path)) {
        const std::vector<fs::path> manifests{path / "manifest.json"};
        if (!fs::exists(manifests.front())) return {path.string() + ": no manifest.json"};
        std::vector<std::string> problems = check_manifest(manifests.front());
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.path().filename() == "manifest.json") continue;
            for (auto& p : check_path(entry.path())) problems.push_back(std::move(p));
        }
        return problems;
    }
    if (!fs::exists(path)) return {path.string() + ": no such file"};
    const auto ext = path.extension();
    if (ext == ".jsonl") return check_jsonl(path);
    if (ext == ".csv") return check_csv(path);
    if (path.filename() == "manifest.json") return check_manifest(path);
    return check_matrix_or_kernel(path);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact rank, concentration and singularity experiments for random band matrices", "bandsing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Sample a matrix from a band ensemble");
    g->add_option("--kind", gen.kind, "general, block, periodic or modified")->capture_default_str();
    g->add_option("--n", gen.n, "Dimension")->required();
    g->add_option("--d", gen.d, "Bandwidth")->required();
    g->add_option("--offband", gen.offband, "zero, rademacher, uniform(a,b) or constant(c)")->capture_default_str();
    g->add_option("--seed", gen.seed, "Seed")->capture_default_str();
    g->add_option("--out", gen.out, "Output file")->required();
    g->add_option("--format", gen.format, "text or binary")->check(CLI::IsMember({"text", "binary"}))->capture_default_str();

    RankArgs rank;
    auto* r = app.add_subcommand("rank", "Rank, singularity and kernel of a stored matrix");
    r->add_option("matrix", rank.path, "Matrix file")->required();
    r->add_option("--prime", rank.prime, "Work over F_p");
    r->add_flag("--integer", rank.integer, "Work over Z");
    r->add_flag("--kernel", rank.kernel, "Print the canonical kernel basis");

    RhoArgs rho;
    auto* c = app.add_subcommand("rho", "Concentration of the lazy signed walk");
    c->add_option("--v", rho.v, "Vector, e.g. 1,2,3");
    c->add_option("--file", rho.file, "File holding the vector");
    c->add_option("--mu", rho.mu, "Step law, e.g. 1/4")->capture_default_str();
    c->add_option("--prime", rho.prime, "Prime modulus")->required();
    c->add_flag("--neighborhood", rho.neighborhood, "Print residues with at least half the mass of 0");
    c->add_flag("--pmf", rho.pmf, "Print the full distribution");
    c->add_flag("--float", rho.floating, "Binary64 masses with an error bound");
    c->add_flag("--estimate", rho.estimate, "Monte Carlo collision bracket instead of the exact value");
    c->add_option("--trials", rho.trials, "Walk pairs for --estimate")->capture_default_str();
    c->add_option("--seed", rho.seed, "Seed for --estimate")->capture_default_str();

    WitnessArgs wit;
    auto* w = app.add_subcommand("lo-witness", "Search for an inverse Littlewood-Offord witness");
    w->add_option("--v", wit.v, "Vector, e.g. 1,1,2");
    w->add_option("--file", wit.file, "File holding the vector");
    w->add_option("--mu", wit.mu, "Step law, at most 1/4")->capture_default_str();
    w->add_option("--prime", wit.prime, "Prime modulus")->required();
    w->add_option("--budget", wit.budget, "Subset evaluations in the exhaustive phase")->capture_default_str();

    CampaignArgs sing;
    auto* s = app.add_subcommand("singprob", "Estimate singularity probabilities");
    s->add_option("config", sing.config, "Campaign config file")->required();
    s->add_option("--out", sing.out, "Campaign directory (default $BANDSING_OUT/singprob-<config>)");
    s->add_option("--threads", sing.threads, "Worker threads, overriding the config");

    CampaignArgs surv;
    auto* k = app.add_subcommand("kernel-survey", "Survey kernel vectors of row-deleted matrices");
    k->add_option("config", surv.config, "Campaign config file")->required();
    k->add_option("--out", surv.out, "Campaign directory (default $BANDSING_OUT/kernel-survey-<config>)");
    k->add_option("--threads", surv.threads, "Worker threads, overriding the config");

    std::vector<std::string> check_paths;
    auto* ch = app.add_subcommand("check", "Validate output files against their schemas");
    ch->add_option("paths", check_paths, "Files or campaign directories")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        if (*g) return cmd_gen(gen, out);
        if (*r) return cmd_rank(rank, out);
        if (*c) return cmd_rho(rho, out);
        if (*w) return cmd_lo_witness(wit, out);
        if (*s) return cmd_singprob(sing, out, err);
        if (*k) return cmd_kernel_survey(surv, out, err);
        if (*ch) {
            int status = kOk;
            for (const auto& p : check_paths) {
                const auto problems = check_path(p);
                if (problems.empty()) {
                    out << "ok: " << p << '\n';
                    continue;
                }
                status = kRuntimeError;
                for (const auto& problem : problems) err << "error: " << problem << '\n';
            }
            return status;
        }
    } catch (const ConfigError& e) {
        for (const auto& problem : e.problems) err << "error: " << problem << '\n';
        return kUsageError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace bandsing::cli
