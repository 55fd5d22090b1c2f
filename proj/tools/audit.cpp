// audit: command-line front end for the experiments.
//
//   audit run --config exp.json --seed 0 --trials 10 --out results/
//   audit margins --contest contest.json
//   audit census --model cyprus.json --sample-frac 0.5%,0.66%,1% --trials 10 --out results/

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rla/csv.hpp"
#include "rla/harness.hpp"

namespace fs = std::filesystem;
using namespace rla;

namespace {

PartyPair parse_pair(const std::string& text, const Contest& c)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw InputError("expected p1:p2, got '" + text + "'");
    return {c.at(text.substr(0, colon)), c.at(text.substr(colon + 1))};
}

std::string peek_kind(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path.string());
    try {
        auto j = nlohmann::json::parse(in);
        const auto& k = j.at("kind");
        return k.is_string() ? k.get<std::string>() : std::string();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::vector<double> config_fractions(const fs::path& path)
{
    std::ifstream in(path);
    auto j = nlohmann::json::parse(in);
    if (!j.contains("sample_fractions"))
        throw InputError(path.string() + ": census run needs sample_fractions");
    std::vector<double> out;
    for (const auto& f : j["sample_fractions"]) {
        if (f.is_string())
            for (double x : parse_fraction_grid(f.get<std::string>()))
                out.push_back(x);
        else
            out.push_back(f.get<double>());
    }
    return out;
}

void print_curve_summary(const std::vector<CensusCurvePoint>& points)
{
    std::vector<double> fractions;
    for (const auto& p : points) {
        if (std::find(fractions.begin(), fractions.end(), p.fraction) == fractions.end())
            fractions.push_back(p.fraction);
    }
    std::cout << "fraction,median_risk_limit\n";
    for (double f : fractions) {
        std::vector<double> r;
        for (const auto& p : points) {
            if (p.fraction == f)
                r.push_back(p.result.risk_limit);
        }
        std::cout << csv::format_double(f) << ',' << csv::format_double(median(r)) << '\n';
    }
}

int run_census(const fs::path& model, const std::vector<double>& grid, std::uint64_t seed, std::uint64_t trials,
    unsigned threads, const std::optional<fs::path>& out, const std::optional<fs::path>& trace_dir)
{
    auto cfg = load_census_config(model);
    if (cfg.households_file) {
        // Household data supplied: one audit of the given survey.
        const auto households = read_households_csv(*cfg.households_file, cfg.model);
        Rng rng = Rng::stream(seed, 0);
        std::optional<std::ofstream> trace;
        CensusTrace sink;
        if (trace_dir) {
            fs::create_directories(*trace_dir);
            trace.emplace(*trace_dir / "census_trace.csv");
            *trace << "step,pair,T,mu,eta,U\n";
            sink = [&](std::int64_t step, std::size_t k, double T, double mu, double eta, double U) {
                *trace << step << ',' << k << ',' << csv::format_double(T) << ',' << csv::format_double(mu) << ','
                       << csv::format_double(eta) << ',' << csv::format_double(U) << '\n';
            };
        }
        const auto result = census_rla(cfg.model, households, rng, cfg.options, sink);
        if (out) {
            fs::create_directories(*out);
            std::ofstream f(*out / "pairs.csv", std::ios::binary);
            write_pair_risks_csv(cfg.model, result, f);
        } else {
            write_pair_risks_csv(cfg.model, result, std::cout);
        }
        std::cout << "risk_limit," << csv::format_double(result.risk_limit) << '\n';
        return 0;
    }
    const auto points = run_census_curve(cfg, grid, seed, trials, threads);
    if (out)
        write_census_curve_csv(cfg, points, *out);
    print_curve_summary(points);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Risk-limiting audits for highest-averages elections and census apportionment"};
    app.require_subcommand(1);

    fs::path config, contest_file, model, out_dir, trace_dir;
    std::uint64_t seed = 0, trials = 10;
    unsigned threads = 0;
    std::string grid_text;
    std::string type = "knesset";
    std::int64_t seats = 120;
    std::string threshold = "13/400";
    std::vector<std::string> apparentments, weaken;

    auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment from a JSON config");
    run->add_option("--config", config, "Experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Root seed");
    run->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--trace", trace_dir, "Write per-step CSV traces to this directory");
    run->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* margins = app.add_subcommand("margins", "List assertions and their margins for a reported tally");
    margins->add_option("--contest", contest_file, "Contest JSON config or party tally CSV")
        ->required()
        ->check(CLI::ExistingFile);
    margins->add_option("--type", type, "knesset or plurality (CSV input only)");
    margins->add_option("--seats", seats, "Seats (CSV input only)");
    margins->add_option("--threshold", threshold, "Threshold fraction (CSV input only)");
    margins->add_option("--apparentment", apparentments, "p1:p2, repeatable (CSV input only)");
    margins->add_option("--weaken", weaken, "Weaken the move assertion p1:p2, repeatable");

    auto* census = app.add_subcommand("census", "Census apportionment audit");
    census->add_option("--model", model, "Census config")->required()->check(CLI::ExistingFile);
    census->add_option("--sample-frac", grid_text, "Survey fractions, e.g. 0.005,0.66%,1%");
    census->add_option("--seed", seed, "Root seed");
    census->add_option("--trials", trials, "Trials per fraction")->check(CLI::PositiveNumber);
    census->add_option("--out", out_dir, "Output directory");
    census->add_option("--trace", trace_dir, "Per-step CSV directory (household-file mode)");
    census->add_option("--threads", threads, "Worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends exit 0; every usage error is an input error.
        return app.exit(e) == 0 ? 0 : 2;
    }

    auto opt_path = [](const fs::path& p) { return p.empty() ? std::nullopt : std::optional<fs::path>(p); };

    try {
        if (*run) {
            if (peek_kind(config) == "census")
                return run_census(config, config_fractions(config), seed, trials, threads, out_dir, opt_path(trace_dir));
            const auto cfg = load_experiment_config(config);
            const auto result = run_experiment(cfg, seed, trials, threads, opt_path(trace_dir));
            write_experiment_csv(result, out_dir);
            std::int64_t recounts = 0;
            for (const auto& r : result.reports)
                recounts += r.outcome.full_recount;
            std::cout << result.reports.size() << " audits, " << recounts << " full recounts; results in "
                      << out_dir.string() << '\n';
            return 0;
        }
        if (*margins) {
            ExperimentConfig cfg;
            if (contest_file.extension() == ".json") {
                auto c = load_contest_config(contest_file);
                cfg.contest_type = c.type;
                cfg.knesset = std::move(c.knesset);
                cfg.contest_totals = std::move(c.reported);
            } else {
                auto data = read_contest_csv(contest_file.string());
                cfg.knesset.contest = data.contest;
                cfg.contest_totals = data.reported;
                if (type == "plurality")
                    cfg.contest_type = ContestType::plurality;
                else if (type != "knesset")
                    throw InputError("--type must be knesset or plurality");
                cfg.knesset.seats = seats;
                cfg.knesset.threshold = parse_rational(threshold);
                for (const auto& a : apparentments)
                    cfg.knesset.apparentments.push_back(parse_pair(a, cfg.knesset.contest));
                cfg.knesset.validate();
            }
            for (const auto& w : weaken)
                cfg.weaken.push_back(parse_pair(w, cfg.knesset.contest));
            const auto& reported = cfg.contest_totals;
            const auto assorters = contest_assertions(cfg, reported);
            std::cout << "assertion,margin,margin_pct\n";
            for (const auto& a : assorters) {
                const auto m = assertion_margin(a, reported);
                std::cout << csv::escape(a.label()) << ',' << m << ','
                          << csv::format_double(100.0 * static_cast<double>(m) / static_cast<double>(reported.total()))
                          << '\n';
            }
            return 0;
        }
        if (*census) {
            std::vector<double> grid;
            if (!grid_text.empty())
                grid = parse_fraction_grid(grid_text);
            else if (!load_census_config(model).households_file)
                throw InputError("--sample-frac is required unless the model names a households file");
            return run_census(model, grid, seed, trials, threads, opt_path(out_dir), opt_path(trace_dir));
        }
    } catch (const InputError& e) {
        std::cerr << "audit: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "audit: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "audit: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "audit: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
