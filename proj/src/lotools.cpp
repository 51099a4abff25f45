#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "bandsing/lotools.hpp"
#include "bandsing/rng.hpp"
#include "bandsing/stats.hpp"

namespace bandsing {

namespace mp = boost::multiprecision;

namespace {

std::vector<u64> reduced(std::span<const u64> v, u64 p) {
    std::vector<u64> out(v.begin(), v.end());
    for (auto& x : out) x %= p;
    return out;
}

/// Indices i with v_i outside the level set encoded by `member`.
std::vector<std::size_t> exceptional_indices(const std::vector<u64>& v, const std::vector<char>& member) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!member[v[i]]) out.push_back(i);
    return out;
}

std::vector<char> membership(const std::vector<u64>& set, u64 p) {
    std::vector<char> member(p, 0);
    for (u64 x : set) member[x] = 1;
    return member;
}

std::size_t exceptional_count(const MassFunction& f, const std::vector<u64>& v) {
    const auto member = membership(f.half_zero_level_set(), f.modulus().value());
    std::size_t count = 0;
    for (u64 x : v) count += member[x] ? 0 : 1;
    return count;
}

LOWitness make_witness(const std::vector<u64>& v, std::vector<std::size_t> T, const MassFunction& f, double D,
                       const Dyadic& rho) {
    LOWitness wit;
    std::sort(T.begin(), T.end());
    wit.T = std::move(T);
    for (std::size_t i : wit.T) wit.w.push_back(v[i]);
    wit.N = f.half_zero_level_set();
    wit.exceptional = exceptional_indices(v, membership(wit.N, f.modulus().value()));
    wit.D = D;
    wit.rho = rho;
    return wit;
}

/// The walk law is symmetric, so v_i and -v_i contribute identical steps.
u64 canonical(u64 x, u64 p) { return std::min(x, (p - x) % p); }

}  // namespace

std::string to_string(SearchOutcome outcome) {
    switch (outcome) {
        case SearchOutcome::greedy: return "greedy";
        case SearchOutcome::exhaustive: return "exhaustive";
        case SearchOutcome::not_found: return "not_found";
        case SearchOutcome::budget_exhausted: return "budget_exhausted";
    }
    return "not_found";
}

Dyadic rho_mu(std::span<const u64> v, const StepLaw& law, PrimeModulus p, WalkOptions options) {
    options.mode = MassMode::exact;
    return walk_distribution(v, law, p, options).max_mass();
}

std::size_t support_size(std::span<const u64> v, u64 p) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [p](u64 x) { return x % p != 0; }));
}

std::vector<u64> neighborhood(std::span<const u64> w, const StepLaw& law, PrimeModulus p, WalkOptions options) {
    return walk_distribution(w, law, p, options).half_zero_level_set();
}

double lo_budget(const Dyadic& rho, const StepLaw& law) {
    if (rho.is_zero()) throw std::domain_error("lo_budget: rho must be positive");
    const auto& num = rho.numerator();
    const auto top = static_cast<long long>(mp::msb(num));
    const long long drop = std::max(0LL, top - 60);
    const double head = Dyadic::Int(num >> static_cast<unsigned>(drop)).convert_to<double>();
    const double log2_rho = std::log2(head) + static_cast<double>(drop) - static_cast<double>(rho.exponent());
    return (2.0 / law.value()) * (-log2_rho);
}

WitnessSearch find_lo_witness(std::span<const u64> v_in, const StepLaw& law, PrimeModulus p, WitnessOptions options) {
    if (law.value() > 0.25) throw PreconditionError("find_lo_witness: the inverse theorem needs mu <= 1/4");
    const u64 pv = p.value();
    const std::vector<u64> v = reduced(v_in, pv);
    const std::size_t d = v.size();

    const Dyadic rho = rho_mu(v, law, p);
    const double D = lo_budget(rho, law);
    if (static_cast<double>(support_size(v, pv)) < D)
        throw PreconditionError("find_lo_witness: |v| < D = " + std::to_string(D));
    if (rho.compare_to(2, pv) < 0) throw PreconditionError("find_lo_witness: rho_mu(v) < 2/p");

    const auto limit = static_cast<std::size_t>(std::floor(D + 1e-12));
    WitnessSearch result;

    // Greedy: grow T one coordinate at a time, maximizing coverage.
    {
        std::vector<std::size_t> T;
        std::vector<char> used(d, 0);
        MassFunction current(p);
        std::size_t misses = exceptional_count(current, v);
        ++result.evaluated;
        while (misses > limit && T.size() < limit) {
            std::unordered_map<u64, std::size_t> cache;  // canonical value -> misses
            std::size_t best_i = d, best_misses = 0;
            for (std::size_t i = 0; i < d; ++i) {
                if (used[i] || v[i] == 0) continue;
                const u64 key = canonical(v[i], pv);
                auto it = cache.find(key);
                if (it == cache.end()) {
                    MassFunction trial = current;
                    trial.add_step(v[i], law);
                    it = cache.emplace(key, exceptional_count(trial, v)).first;
                    ++result.evaluated;
                }
                if (best_i == d || it->second < best_misses) {
                    best_i = i;
                    best_misses = it->second;
                }
            }
            if (best_i == d) break;
            used[best_i] = 1;
            T.push_back(best_i);
            current.add_step(v[best_i], law);
            misses = best_misses;
        }
        if (misses <= limit && T.size() <= limit) {
            result.outcome = SearchOutcome::greedy;
            result.witness = make_witness(v, T, current, D, rho);
            return result;
        }
    }

    if (d > options.exhaustive_max_d) {
        result.outcome = SearchOutcome::not_found;
        return result;
    }

    // Exhaustive: all T with |T| <= min(D, cap), by size then lexicographically.
    const std::size_t max_size = std::min(limit, options.exhaustive_max_T);
    std::set<std::vector<u64>> seen;  // canonical value multisets already rejected
    std::vector<std::size_t> T;
    std::vector<MassFunction> stack{MassFunction(p)};
    bool exhausted = false;
    std::optional<LOWitness> found;

    auto search = [&](auto&& self, std::size_t start, std::size_t size) -> void {
        if (found || exhausted) return;
        if (T.size() == size) {
            std::vector<u64> key;
            for (std::size_t i : T) key.push_back(canonical(v[i], pv));
            std::sort(key.begin(), key.end());
            if (!seen.insert(key).second) return;
            if (++result.evaluated > options.budget) {
                exhausted = true;
                return;
            }
            if (exceptional_count(stack.back(), v) <= limit) found = make_witness(v, T, stack.back(), D, rho);
            return;
        }
        for (std::size_t i = start; i < d && !found && !exhausted; ++i) {
            if (d - i < size - T.size()) break;
            T.push_back(i);
            stack.push_back(stack.back());
            stack.back().add_step(v[i], law);
            self(self, i + 1, size);
            stack.pop_back();
            T.pop_back();
        }
    };
    for (std::size_t size = 1; size <= max_size && !found && !exhausted; ++size) search(search, 0, size);

    if (found) {
        result.outcome = SearchOutcome::exhaustive;
        result.witness = std::move(found);
    } else {
        result.outcome = exhausted ? SearchOutcome::budget_exhausted : SearchOutcome::not_found;
    }
    return result;
}

bool verify_witness(std::span<const u64> v_in, const StepLaw& law, PrimeModulus p, const LOWitness& wit) {
    const u64 pv = p.value();
    const std::vector<u64> v = reduced(v_in, pv);
    const Dyadic rho = rho_mu(v, law, p);
    if (!(rho == wit.rho)) return false;
    const double D = lo_budget(rho, law);
    if (std::abs(D - wit.D) > 1e-9 * std::max(1.0, D)) return false;

    if (!std::is_sorted(wit.T.begin(), wit.T.end()) ||
        std::adjacent_find(wit.T.begin(), wit.T.end()) != wit.T.end())
        return false;
    if (!wit.T.empty() && wit.T.back() >= v.size()) return false;
    if (wit.w.size() != wit.T.size()) return false;
    for (std::size_t k = 0; k < wit.T.size(); ++k)
        if (wit.w[k] % pv != v[wit.T[k]]) return false;

    const std::vector<u64> N = neighborhood(wit.w, law, p);
    if (N != wit.N) return false;
    if (exceptional_indices(v, membership(N, pv)) != wit.exceptional) return false;

    if (static_cast<double>(wit.T.size()) > D + 1e-12) return false;
    if (static_cast<double>(wit.exceptional.size()) > D + 1e-12) return false;
    // |N| <= 256 / rho  <=>  rho <= 256 / |N|
    return rho.compare_to(256, N.size()) <= 0;
}

FourierCheck check_fourier_lemma(std::span<const u64> v_in, const Fraction& c, const StepLaw& mu,
                                 std::span<const StepLaw> nu_grid, std::size_t K, PrimeModulus p) {
    if (c.num <= 0) throw std::invalid_argument("check_fourier_lemma: c must be positive");
    const u64 pv = p.value();
    const std::vector<u64> v = reduced(v_in, pv);
    if (support_size(v, pv) < K) throw PreconditionError("check_fourier_lemma: |v| < K");
    const Dyadic rho = rho_mu(v, mu, p);
    if (rho.compare_to(2 * v.size(), pv) < 0) throw PreconditionError("check_fourier_lemma: rho_mu(v) < 2d/p");

    FourierCheck out;
    out.ratio = std::numeric_limits<double>::infinity();
    std::optional<StepLaw> best;
    double best_ratio = 0.0;
    for (const StepLaw& nu : nu_grid) {
        const Dyadic rho_nu = rho_mu(v, nu, p);
        const double ratio = rho.to_double() / rho_nu.to_double();
        out.ratio = std::min(out.ratio, ratio);
        // rho_mu * c.den <= c.num * rho_nu, compared exactly
        const Dyadic::Int lhs = rho.numerator() * c.den << rho_nu.exponent();
        const Dyadic::Int rhs = rho_nu.numerator() * c.num << rho.exponent();
        if (lhs <= rhs && (!best || nu.value() > best->value())) {
            best = nu;
            best_ratio = ratio;
        }
    }
    if (best) {
        out.nu = best;
        out.ratio = best_ratio;
    }
    return out;
}

CollisionEstimate collision_estimate_rho(std::span<const u64> v_in, const StepLaw& law, PrimeModulus p,
                                         std::uint64_t trials, std::uint64_t seed) {
    if (trials < 2) throw std::invalid_argument("collision_estimate_rho: need at least two trials");
    const u64 pv = p.value();
    const std::vector<u64> v = reduced(v_in, pv);
    const unsigned e = law.exponent();
    const std::uint64_t num = law.numerator();

    auto walk = [&](SplitMix64& rng) {
        u64 x = 0;
        for (u64 step : v) {
            const std::uint64_t r = rng();
            const bool moves = e == 0 || (r >> (64 - e)) < num;
            if (!moves || step == 0) continue;
            x = (r & 1) ? add_mod(x, step, pv) : sub_mod(x, step, pv);
        }
        return x;
    };

    std::uint64_t collisions = 0;
    std::unordered_map<u64, std::uint64_t> counts;
    for (std::uint64_t t = 0; t < trials; ++t) {
        SplitMix64 rng(hash_key(seed, t));
        const u64 a = walk(rng);
        const u64 b = walk(rng);
        collisions += a == b ? 1 : 0;
        ++counts[a];
        ++counts[b];
    }
    std::uint64_t modal = 0;
    for (const auto& [x, c] : counts) modal = std::max(modal, c);

    const ProportionInterval q = wilson_interval(collisions, trials);
    CollisionEstimate out;
    out.q_hat = static_cast<double>(collisions) / static_cast<double>(trials);
    out.lower = q.lo;
    out.upper = std::min(1.0, std::sqrt(q.hi));
    out.modal = static_cast<double>(modal) / static_cast<double>(2 * trials);
    return out;
}

}  // namespace bandsing
