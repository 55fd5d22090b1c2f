// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.
// Run from the source tree (configs/ and data/ are read relative to it).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rla/alpha.hpp"
#include "rla/batchcomp.hpp"
#include "rla/census.hpp"
#include "rla/harness.hpp"
#include "rla/knesset.hpp"

namespace fs = std::filesystem;
using namespace rla;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// Upper bound p + 3 sqrt(p(1-p)/trials).
double rate_bound(double p, int trials)
{
    return p + 3.0 * std::sqrt(p * (1.0 - p) / trials);
}

Verdict risk_alpha()
{
    const auto t0 = std::chrono::steady_clock::now();
    Contest c({"Alice", "Bob"});
    const Tally truth({990, 1010, 0});
    const Tally reported({1010, 990, 0});
    const auto ballots = expand_ballots(truth);
    const std::vector<Assorter> assorters{plurality_assorter(c, BallotId{0}, BallotId{1})};
    AuditConfig cfg;
    const int trials = 2000;
    int approved = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::stream(1, static_cast<std::uint64_t>(t));
        approved += alpha_audit(ballots, assorters, reported, cfg, rng).approved;
    }
    const double rate = static_cast<double>(approved) / trials;
    const double bound = rate_bound(cfg.alpha, trials);
    const double secs = seconds_since(t0);
    return {rate <= bound && secs < 60.0,
        "wrongful approvals " + std::to_string(approved) + "/" + std::to_string(trials) + " = " + fmt("%.4f", rate)
            + " (bound " + fmt("%.4f", bound) + "), " + fmt("%.1f", secs) + " s"};
}

Verdict risk_batchcomp()
{
    // 19 accurate batches split 50/50 and one batch that carries every error:
    // reported 60/40 for Alice, truly 40/60.
    Contest c({"Alice", "Bob"});
    std::vector<BatchRecord> batches;
    for (int i = 0; i < 19; ++i)
        batches.push_back({"b" + std::to_string(i), Tally({50, 50, 0}), Tally({50, 50, 0}), 100});
    batches.push_back({"bad", Tally({60, 40, 0}), Tally({40, 60, 0}), 100});
    const std::vector<Assorter> assorters{plurality_assorter(c, BallotId{0}, BallotId{1})};
    AuditConfig cfg;
    BatchcompOptions options;
    const int trials = 2000;
    int approved = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::stream(2, static_cast<std::uint64_t>(t));
        approved += batchcomp_audit(batches, assorters, cfg, rng, options).approved;
    }
    const double rate = static_cast<double>(approved) / trials;
    const double bound = rate_bound(cfg.alpha, trials);
    return {rate <= bound, "wrongful approvals " + std::to_string(approved) + "/" + std::to_string(trials) + " = "
                               + fmt("%.4f", rate) + " (bound " + fmt("%.4f", bound) + ")"};
}

Verdict risk_census()
{
    // X: 300 households of 3 (900). Y: 140 of 4 and 60 of 5 (860). Three
    // seats by D'Hondt give X 2, Y 1. The PES adds one resident to 60 of Y's
    // four-person households, so Y truly has 920 and the allocation is X 1, Y 2.
    CensusModel m;
    m.states = {"X", "Y"};
    m.representatives = 3;
    m.constants = {0.0, 0.0};
    m.g_max = 6;
    std::vector<Household> h;
    for (int i = 0; i < 300; ++i)
        h.push_back({"x" + std::to_string(i), 0, 3, 3, true});
    for (int i = 0; i < 200; ++i) {
        const int census = i < 140 ? 4 : 5;
        const int pes = i < 60 ? 5 : census;
        h.push_back({"y" + std::to_string(i), 1, census, pes, true});
    }
    std::vector<std::int64_t> census_pop = census_populations(m, h), pes_pop{0, 0};
    for (const auto& x : h)
        pes_pop[x.state] += *x.pes_count;
    const auto census_alloc = apportion(m, census_pop);
    const auto pes_alloc = apportion(m, pes_pop);
    if (census_alloc == pes_alloc)
        return {false, "instance does not change the allocation"};

    const int trials = 2000;
    int low = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::stream(3, static_cast<std::uint64_t>(t));
        low += census_rla(m, h, rng).risk_limit <= 0.1;
    }
    const double rate = static_cast<double>(low) / trials;
    const double bound = rate_bound(0.1, trials);
    return {rate <= bound, "Pr[risk <= 0.1] = " + std::to_string(low) + "/" + std::to_string(trials) + " = "
                               + fmt("%.4f", rate) + " (bound " + fmt("%.4f", bound) + ")"};
}

// Library result as an optional: nullopt when it reports a tie or no winner.
template <class F>
auto guarded(F&& f) -> std::optional<decltype(f())>
{
    try {
        return f();
    } catch (const Error&) {
        return std::nullopt;
    }
}

void for_each_vector(std::size_t len, std::int64_t lo, std::int64_t hi, std::vector<std::int64_t>& cur,
    const std::function<void(const std::vector<std::int64_t>&)>& f)
{
    if (cur.size() == len) {
        f(cur);
        return;
    }
    for (std::int64_t v = lo; v <= hi; ++v) {
        cur.push_back(v);
        for_each_vector(len, lo, hi, cur, f);
        cur.pop_back();
    }
}

Verdict oracle_equivalence()
{
    std::int64_t cases = 0, ties = 0, mismatches = 0;
    std::string first;
    const std::vector<Rational> thresholds{Rational(0), Rational(13, 400), Rational(1, 5)};

    for (std::size_t P = 1; P <= 4; ++P) {
        std::vector<std::string> names;
        for (std::size_t p = 0; p < P; ++p)
            names.push_back("p" + std::to_string(p));
        std::vector<std::vector<PartyPair>> alliances{{}};
        if (P >= 2)
            alliances.push_back({{BallotId{0}, BallotId{1}}});
        if (P == 4)
            alliances.push_back({{BallotId{0}, BallotId{1}}, {BallotId{2}, BallotId{3}}});
        KnessetContest k;
        k.contest = Contest(names);
        std::vector<std::int64_t> cur;
        for_each_vector(P, 0, 20, cur, [&](const std::vector<std::int64_t>& votes) {
            for (std::int64_t invalid : {0, 5}) {
                auto counts = votes;
                counts.push_back(invalid);
                const Tally t(counts);
                for (const auto& th : thresholds) {
                    k.threshold = th;
                    for (const auto& al : alliances) {
                        k.apparentments = al;
                        for (std::int64_t S = 1; S <= 6; ++S) {
                            k.seats = S;
                            auto lib = guarded([&] { return allocate_seats(k, t); });
                            auto ref = oracle::knesset(k, t);
                            ++cases;
                            ties += !ref;
                            if (lib != ref && ++mismatches == 1) {
                                std::ostringstream os;
                                os << "knesset S=" << S << " votes";
                                for (auto v : counts)
                                    os << ' ' << v;
                                first = os.str();
                            }
                        }
                    }
                }
            }
        });
    }

    for (std::size_t N = 1; N <= 4; ++N) {
        CensusModel m;
        for (std::size_t s = 0; s < N; ++s)
            m.states.push_back("s" + std::to_string(s));
        const std::vector<std::vector<std::int64_t>> constant_sets{std::vector<std::int64_t>(N, 0),
            std::vector<std::int64_t>{3, 0, 7, 1}};
        std::vector<std::int64_t> cur;
        for_each_vector(N, 1, 20, cur, [&](const std::vector<std::int64_t>& pops) {
            for (const auto& cs_full : constant_sets) {
                std::vector<std::int64_t> cs(cs_full.begin(), cs_full.begin() + static_cast<std::ptrdiff_t>(N));
                m.constants.assign(cs.begin(), cs.end());
                for (Divisor d : {Divisor::dhondt, Divisor::sainte_lague}) {
                    m.divisor = d;
                    for (std::int64_t S = 1; S <= 6; ++S) {
                        m.representatives = S;
                        auto lib = guarded([&] { return apportion(m, pops); });
                        auto ref = oracle::census(pops, cs, S, d);
                        ++cases;
                        ties += !ref;
                        if (lib != ref && ++mismatches == 1) {
                            std::ostringstream os;
                            os << "census S=" << S << " " << to_string(d) << " pops";
                            for (auto v : pops)
                                os << ' ' << v;
                            first = os.str();
                        }
                    }
                }
            }
        });
    }
    std::string detail = std::to_string(cases) + " cases (" + std::to_string(ties) + " ties), "
        + std::to_string(mismatches) + " mismatches";
    if (!first.empty())
        detail += "; first: " + first;
    return {mismatches == 0, detail};
}

bool on_boundary(const KnessetContest& k, const Tally& t)
{
    const std::int64_t valid = t.total() - t.count(k.contest.invalid());
    for (std::size_t p = 0; p < k.contest.party_count(); ++p) {
        if (t.counts()[p] * k.threshold.denominator() == valid * k.threshold.numerator())
            return true;
    }
    return false;
}

Verdict knesset_theorem()
{
    std::int64_t checked = 0, skipped = 0, counterexamples = 0;
    std::string first;
    for (const Rational& th : {Rational(13, 400), Rational(1, 5)}) {
        for (bool allied : {false, true}) {
            KnessetContest k;
            k.contest = Contest({"A", "B", "C"});
            k.seats = 4;
            k.threshold = th;
            if (allied)
                k.apparentments = {{BallotId{0}, BallotId{1}}};
            for (std::int64_t n = 1; n <= 30; ++n) {
                std::vector<Tally> truths;
                std::vector<SeatAllocation> true_alloc;
                oracle::for_each_tally(4, n, [&](const Tally& t) {
                    if (on_boundary(k, t)) {
                        ++skipped;
                        return;
                    }
                    auto a = oracle::knesset(k, t);
                    if (!a) {
                        ++skipped;
                        return;
                    }
                    truths.push_back(t);
                    true_alloc.push_back(*a);
                });
                // The assertion set depends on the reported outcome only.
                std::map<std::pair<std::vector<std::int64_t>, std::vector<bool>>, Tally> outcomes;
                for (std::size_t i = 0; i < truths.size(); ++i)
                    outcomes.emplace(std::make_pair(true_alloc[i].seats, true_alloc[i].above), truths[i]);
                for (const auto& [key, reported] : outcomes) {
                    const SeatAllocation rep = allocate_seats(k, reported);
                    const auto assertions = generate_assertions(k, reported, rep);
                    for (std::size_t i = 0; i < truths.size(); ++i) {
                        bool all = true;
                        for (const auto& a : assertions)
                            all = all && a.mean_exceeds_half(truths[i]);
                        const bool same = true_alloc[i] == rep;
                        ++checked;
                        if (all != same && ++counterexamples == 1) {
                            std::ostringstream os;
                            os << "t=" << th << (allied ? " allied" : "") << " reported";
                            for (auto v : reported.counts())
                                os << ' ' << v;
                            os << " truth";
                            for (auto v : truths[i].counts())
                                os << ' ' << v;
                            first = os.str();
                        }
                    }
                }
            }
        }
    }
    std::string detail = std::to_string(checked) + " (reported, truth) pairs, " + std::to_string(skipped)
        + " tied or boundary tallies skipped, " + std::to_string(counterexamples) + " counterexamples";
    if (!first.empty())
        detail += "; first: " + first;
    return {counterexamples == 0, detail};
}

Verdict batchcomp_constancy()
{
    const auto data = read_contest_csv("data/knesset_example.csv");
    KnessetContest k;
    k.contest = data.contest;
    k.apparentments = {{k.contest.at("Cedar"), k.contest.at("Date")}, {k.contest.at("Olive"), k.contest.at("Fig")},
        {k.contest.at("Vine"), k.contest.at("Almond")}};
    const auto seats = allocate_seats(k, data.reported);
    const auto assertions = generate_assertions(k, data.reported, seats);

    double worst = 0.0;
    std::int64_t spread_failures = 0;
    std::vector<std::vector<BatchRecord>> partitions;
    for (SyntheticBatches spec : {SyntheticBatches{250, 250, 550, 0.5}, SyntheticBatches{250, 400, 400, 0.5}}) {
        Rng rng = Rng::stream(6, partitions.size());
        partitions.push_back(generate_batches(k.contest, data.reported, spec, rng));
    }
    for (const auto& batches : partitions) {
        for (const auto& a : assertions) {
            BatchAssorter A(a, batches, 1e-10);
            for (const auto& b : batches) {
                const double v = batch_assorter_value(A, b);
                worst = std::max(worst, std::abs(v - A.eta0) / A.eta0);
            }
        }
    }
    if (worst > 1e-12)
        ++spread_failures;

    // Equal batch sizes: the sampling order cannot matter.
    const auto& equal = partitions[1];
    std::vector<std::vector<std::int64_t>> counts;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng = Rng::stream(60, seed);
        const auto out = batchcomp_audit(equal, assertions, AuditConfig{}, rng, BatchcompOptions{});
        std::vector<std::int64_t> c{out.batches_examined};
        for (const auto& r : out.assertions)
            c.push_back(r.batches_examined);
        counts.push_back(std::move(c));
    }
    const bool same = std::all_of(counts.begin(), counts.end(), [&](const auto& c) { return c == counts[0]; });
    const auto [lo, hi] = std::minmax_element(counts[0].begin() + 1, counts[0].end());
    return {spread_failures == 0 && same,
        "max relative deviation of A over batches " + fmt("%.3g", worst) + ", examined batches over 10 seeds "
            + (same ? "identical" : "differ") + " (per assertion " + std::to_string(*lo) + " to "
            + std::to_string(*hi) + " of " + std::to_string(equal.size()) + ")"};
}

Verdict efficiency()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load_experiment_config("configs/plurality_efficiency.json");
    const std::uint64_t trials = 100;
    const auto result = run_experiment(cfg, 7, trials);
    const std::size_t A = cfg.audits.size();
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < A; ++i) {
        if (cfg.audits[i] == AuditKind::alpha_batch)
            ia = i;
        if (cfg.audits[i] == AuditKind::batchcomp)
            ib = i;
    }
    // Per assertion: trials in which Batchcomp needed strictly fewer ballots.
    const auto& first = result.reports[ia].outcome.assertions;
    std::vector<int> fewer(first.size(), 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto& ra = result.reports[t * A + ia].outcome.assertions;
        const auto& rb = result.reports[t * A + ib].outcome.assertions;
        for (std::size_t j = 0; j < ra.size(); ++j)
            fewer[j] += rb[j].ballots_examined < ra[j].ballots_examined;
    }
    bool pass = true;
    std::string detail;
    for (std::size_t j = 0; j < first.size(); ++j) {
        const double pct = 100.0 * static_cast<double>(result.reports[ia].margins[j])
            / static_cast<double>(result.total_ballots);
        pass = pass && fewer[j] >= 90;
        detail += (j ? ", " : "") + std::string("margin ") + fmt("%.2g", pct) + "%: " + std::to_string(fewer[j]) + "/"
            + std::to_string(trials);
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 300.0;
    return {pass, "Batchcomp fewer ballots per assertion: " + detail + "; " + fmt("%.1f", secs) + " s"};
}

Verdict cyprus()
{
    const auto t0 = std::chrono::steady_clock::now();
    struct Target {
        double fraction;
        double limit;
    };
    struct Case {
        const char* config;
        std::vector<Target> targets;
    };
    const std::vector<Case> cases{{"configs/cyprus.json", {{0.0066, 0.1}, {0.0087, 0.05}}},
        {"configs/cyprus_disagree.json", {{0.0072, 0.1}, {0.010, 0.05}}}};
    const double tol = 0.0002;
    bool pass = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto cfg = load_census_config(c.config);
        std::vector<double> grid;
        for (const auto& t : c.targets) {
            grid.push_back(t.fraction - tol);
            grid.push_back(t.fraction);
            grid.push_back(t.fraction + tol);
        }
        const auto points = run_census_curve(cfg, grid, 0, 10);
        for (const auto& t : c.targets) {
            double best = 1.0;
            for (double f : {t.fraction - tol, t.fraction, t.fraction + tol}) {
                std::vector<double> r;
                for (const auto& p : points) {
                    if (p.fraction == f)
                        r.push_back(p.result.risk_limit);
                }
                best = std::min(best, median(r));
            }
            pass = pass && best <= t.limit;
            detail += (detail.empty() ? "" : ", ") + fs::path(c.config).stem().string() + " @"
                + fmt("%.2f", 100 * t.fraction) + "%: median " + fmt("%.3f", best) + " (need <= " + fmt("%.2f", t.limit)
                + ")";
        }
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 600.0;
    return {pass, detail + "; " + fmt("%.1f", secs) + " s"};
}

Verdict factor_forms()
{
    Rng rng(9);
    double worst = 0.0;
    const int N = 1000000;
    for (int i = 0; i < N; ++i) {
        const double u = 0.5 + 9.5 * rng.uniform();
        const double mu = u * (0.001 + 0.998 * rng.uniform());
        const double eta = mu + (u - mu) * (0.001 + 0.998 * rng.uniform());
        const double a = u * rng.uniform();
        const double x = alpha_factor(a, mu, eta, u);
        const double y = alpha_factor_census(a, mu, eta, u);
        worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(x)));
    }
    return {worst <= 1e-12, "max relative difference " + fmt("%.3g", worst) + " over 10^6 tuples"};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Verdict determinism()
{
    const fs::path root = fs::temp_directory_path() / "rla_acceptance_determinism";
    fs::remove_all(root);
    std::vector<std::string> differ;
    std::size_t files = 0;
    auto compare = [&](const fs::path& a, const fs::path& b) {
        for (const auto& e : fs::directory_iterator(a)) {
            ++files;
            if (slurp(e.path()) != slurp(b / e.path().filename()))
                differ.push_back(e.path().filename().string());
        }
    };

    const auto exp = load_experiment_config("configs/knesset_errors.json");
    write_experiment_csv(run_experiment(exp, 11, 6, 1), root / "exp1");
    write_experiment_csv(run_experiment(exp, 11, 6, 2), root / "exp2");
    compare(root / "exp1", root / "exp2");

    const auto census = load_census_config("configs/cyprus.json");
    const std::vector<double> grid{0.0066, 0.01};
    write_census_curve_csv(census, run_census_curve(census, grid, 11, 2, 1), root / "cen1");
    write_census_curve_csv(census, run_census_curve(census, grid, 11, 2, 2), root / "cen2");
    compare(root / "cen1", root / "cen2");
    fs::remove_all(root);

    std::string detail = std::to_string(files) + " CSV files compared";
    for (const auto& d : differ)
        detail += ", differs: " + d;
    return {differ.empty() && files > 0, detail};
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        Verdict (*run)();
    };
    const Criterion criteria[] = {
        {"risk guarantee, ALPHA", risk_alpha},
        {"risk guarantee, Batchcomp", risk_batchcomp},
        {"risk guarantee, census", risk_census},
        {"oracle equivalence", oracle_equivalence},
        {"Knesset assertion theorem", knesset_theorem},
        {"Batchcomp constancy", batchcomp_constancy},
        {"efficiency ordering", efficiency},
        {"Cyprus reproduction", cyprus},
        {"T-update formula forms", factor_forms},
        {"determinism", determinism},
    };
    int failures = 0, index = 0;
    for (const auto& c : criteria) {
        ++index;
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  " << index << ". " << c.name << ": " << v.detail << std::endl;
    }
    std::cout << (criteria + 10 - criteria - failures) << "/10 criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
