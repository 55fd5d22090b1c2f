#include "rla/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "rla/csv.hpp"

namespace rla {

namespace fs = std::filesystem;
using nlohmann::json;

void ErrorModel::validate() const
{
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(p_misread) || !prob(p_invalid) || !prob(rate))
        throw InputError("error model: probabilities must be in [0, 1]");
}

std::vector<BatchRecord> inject_ballot_errors(const std::vector<BatchRecord>& truth, const ErrorModel& model,
    const Contest& contest, Rng& rng)
{
    model.validate();
    if (model.kind != ErrorModel::Kind::ballot_misread)
        return truth;
    std::vector<BatchRecord> out = truth;
    for (auto& b : out) {
        b.reported = Tally(contest);
        for (std::size_t c = 0; c < contest.size(); ++c) {
            const auto k = b.truth.counts()[c];
            for (std::int64_t i = 0; i < k; ++i) {
                BallotId read{c};
                if (rng.bernoulli(model.p_misread)) {
                    read = rng.bernoulli(model.p_invalid) ? contest.invalid()
                                                          : BallotId{rng.below(contest.party_count())};
                }
                b.reported.add(read, 1);
            }
        }
    }
    return out;
}

std::vector<BatchRecord> generate_batches(const Contest& contest, const Tally& truth, const SyntheticBatches& spec,
    Rng& rng)
{
    const std::int64_t n = truth.total();
    if (spec.count <= 0 || spec.min_size <= 0 || spec.max_size < spec.min_size)
        throw InputError("synthetic batches: bad size range");
    if (n < spec.count * spec.min_size || n > spec.count * spec.max_size)
        throw InputError("synthetic batches: " + std::to_string(n) + " ballots do not fit "
            + std::to_string(spec.count) + " batches of the given sizes");

    std::vector<std::int64_t> sizes(static_cast<std::size_t>(spec.count));
    std::int64_t sum = 0;
    for (auto& s : sizes) {
        s = spec.min_size + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(spec.max_size - spec.min_size + 1)));
        sum += s;
    }
    for (std::size_t i = 0; sum != n; i = (i + 1) % sizes.size()) {
        if (sum < n && sizes[i] < spec.max_size) {
            ++sizes[i];
            ++sum;
        } else if (sum > n && sizes[i] > spec.min_size) {
            --sizes[i];
            --sum;
        }
    }

    std::vector<double> centre(contest.size());
    for (auto& c : centre)
        c = rng.uniform();
    std::vector<std::pair<double, std::uint32_t>> keyed;
    keyed.reserve(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < contest.size(); ++c) {
        for (std::int64_t i = 0; i < truth.counts()[c]; ++i)
            keyed.emplace_back(centre[c] + spec.spread * rng.uniform(), static_cast<std::uint32_t>(c));
    }
    std::sort(keyed.begin(), keyed.end());

    std::vector<BatchRecord> out;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        BatchRecord r{"B" + std::to_string(b + 1), Tally(contest), Tally(contest), sizes[b]};
        for (std::int64_t i = 0; i < sizes[b]; ++i)
            r.truth.add(BallotId{keyed[pos++].second}, 1);
        r.reported = r.truth;
        out.push_back(std::move(r));
    }
    return out;
}

AuditKind parse_audit_kind(const std::string& s)
{
    if (s == "alpha")
        return AuditKind::alpha;
    if (s == "alpha_batch")
        return AuditKind::alpha_batch;
    if (s == "batchcomp")
        return AuditKind::batchcomp;
    throw InputError("unknown audit kind '" + s + "'");
}

const char* to_string(AuditKind k)
{
    switch (k) {
    case AuditKind::alpha:
        return "alpha";
    case AuditKind::alpha_batch:
        return "alpha_batch";
    case AuditKind::batchcomp:
        return "batchcomp";
    }
    return "?";
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p)
{
    fs::path q(p);
    return q.is_absolute() ? q : base / q;
}

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

Rational json_rational(const json& j)
{
    if (j.is_string())
        return parse_rational(j.get<std::string>());
    if (j.is_number_integer())
        return Rational(j.get<std::int64_t>());
    if (j.is_number())
        return parse_rational(csv::format_double(j.get<double>()));
    throw InputError("expected a number or a rational string");
}

std::vector<PartyPair> json_pairs(const json& j, const Contest& c, const char* what)
{
    std::vector<PartyPair> out;
    for (const auto& item : j) {
        if (!item.is_array() || item.size() != 2)
            throw InputError(std::string(what) + ": expected pairs of party names");
        out.push_back({c.at(item[0].get<std::string>()), c.at(item[1].get<std::string>())});
    }
    return out;
}

ContestConfig parse_contest(const json& contest, const fs::path& base)
{
    ContestConfig out;
    auto data = read_contest_csv(resolve(base, contest.at("file").get<std::string>()).string());
    out.knesset.contest = data.contest;
    out.reported = data.reported;
    const auto type = contest.value("type", std::string("knesset"));
    if (type == "plurality")
        out.type = ContestType::plurality;
    else if (type != "knesset")
        throw InputError("contest type must be knesset or plurality");
    out.knesset.seats = contest.value("seats", std::int64_t{120});
    if (contest.contains("threshold"))
        out.knesset.threshold = json_rational(contest["threshold"]);
    if (contest.contains("apparentments"))
        out.knesset.apparentments = json_pairs(contest["apparentments"], out.knesset.contest, "apparentments");
    out.knesset.validate();
    return out;
}

} // namespace

ContestConfig load_contest_config(const fs::path& path)
{
    const json j = read_json(path);
    try {
        // An experiment config may be given in place of a contest file.
        const json& c = j.contains("contest") ? j.at("contest") : j;
        return parse_contest(c, path.parent_path());
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

ExperimentConfig load_experiment_config(const fs::path& path)
{
    const json j = read_json(path);
    const fs::path base = path.parent_path();
    ExperimentConfig cfg;
    try {
        const auto& kind = j.at("kind");
        if (kind.is_array()) {
            for (const auto& k : kind)
                cfg.audits.push_back(parse_audit_kind(k.get<std::string>()));
        } else {
            cfg.audits.push_back(parse_audit_kind(kind.get<std::string>()));
        }
        if (cfg.audits.empty())
            throw InputError("config: no audit kind");

        auto contest = parse_contest(j.at("contest"), base);
        cfg.contest_type = contest.type;
        cfg.knesset = std::move(contest.knesset);
        cfg.contest_totals = std::move(contest.reported);

        const auto& batches = j.at("batches");
        if (batches.is_string()) {
            cfg.batches_file = resolve(base, batches.get<std::string>());
        } else {
            const auto& s = batches.at("synthetic");
            SyntheticBatches sb;
            sb.count = s.value("count", sb.count);
            sb.min_size = s.value("min_size", sb.min_size);
            sb.max_size = s.value("max_size", sb.max_size);
            sb.spread = s.value("spread", sb.spread);
            cfg.synthetic = sb;
        }
        if (j.contains("declared_sizes"))
            cfg.declared_sizes_file = resolve(base, j["declared_sizes"].get<std::string>());

        if (j.contains("error_model")) {
            const auto& e = j["error_model"];
            const auto k = e.value("kind", std::string("none"));
            if (k == "ballot_misread") {
                cfg.errors.kind = ErrorModel::Kind::ballot_misread;
                cfg.errors.p_misread = e.at("p_misread").get<double>();
                cfg.errors.p_invalid = e.value("p_invalid", 0.0);
            } else if (k != "none") {
                throw InputError("config: error_model kind must be none or ballot_misread");
            }
            cfg.errors.validate();
        }
        cfg.audit.alpha = j.value("alpha", cfg.audit.alpha);
        cfg.audit.epsilon = j.value("epsilon", cfg.audit.epsilon);
        cfg.audit.validate();
        cfg.delta = j.value("delta", cfg.delta);
        if (!(cfg.delta > 0))
            throw InputError("config: delta must be positive");
        cfg.simplified = j.value("simplified", false);
        if (j.contains("weaken"))
            cfg.weaken = json_pairs(j["weaken"], cfg.knesset.contest, "weaken");
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return cfg;
}

namespace {

BallotId plurality_winner(const Contest& c, const Tally& t)
{
    std::size_t best = 0;
    bool tie = false;
    for (std::size_t p = 1; p < c.party_count(); ++p) {
        if (t.counts()[p] > t.counts()[best]) {
            best = p;
            tie = false;
        } else if (t.counts()[p] == t.counts()[best]) {
            tie = true;
        }
    }
    if (tie)
        throw Error("plurality tie");
    return BallotId{best};
}

} // namespace

std::vector<Assorter> contest_assertions(const ExperimentConfig& cfg, const Tally& reported)
{
    const auto& c = cfg.knesset.contest;
    if (cfg.contest_type == ContestType::plurality) {
        const auto w = plurality_winner(c, reported);
        std::vector<Assorter> out;
        for (std::size_t p = 0; p < c.party_count(); ++p) {
            if (p != w.index)
                out.push_back(plurality_assorter(c, w, BallotId{p}));
        }
        return out;
    }
    return generate_assertions(cfg.knesset, reported, allocate_seats(cfg.knesset, reported), cfg.weaken);
}

namespace {

bool same_outcome(const ExperimentConfig& cfg, const Tally& a, const Tally& b)
{
    try {
        if (cfg.contest_type == ContestType::plurality)
            return plurality_winner(cfg.knesset.contest, a) == plurality_winner(cfg.knesset.contest, b);
        return allocate_seats(cfg.knesset, a) == allocate_seats(cfg.knesset, b);
    } catch (const Error&) {
        return false;
    }
}

std::vector<BatchRecord> load_batches(const ExperimentConfig& cfg, std::uint64_t seed)
{
    const auto& c = cfg.knesset.contest;
    std::vector<BatchRecord> batches;
    if (cfg.batches_file) {
        batches = read_batches_csv(cfg.batches_file->string(), c);
        auto reported = total_reported(batches, c);
        for (std::size_t p = 0; p < c.party_count(); ++p) {
            if (reported.counts()[p] != cfg.contest_totals.counts()[p])
                throw InputError("batch file disagrees with contest file on party '" + c.name(BallotId{p}) + "'");
        }
    } else {
        // Data stream, disjoint from the per-trial streams.
        Rng rng = Rng::stream(seed, UINT64_MAX);
        batches = generate_batches(c, cfg.contest_totals, *cfg.synthetic, rng);
    }
    if (cfg.declared_sizes_file) {
        auto declared = read_declared_sizes(cfg.declared_sizes_file->string());
        std::unordered_set<std::string> ids;
        for (auto& b : batches) {
            ids.insert(b.id);
            if (auto it = declared.find(b.id); it != declared.end()) {
                try {
                    b = pad_missing_ballots(b, it->second, c);
                } catch (const Error& e) {
                    throw InputError("batch '" + b.id + "': " + e.what());
                }
            }
        }
        for (const auto& [id, n] : declared) {
            if (!ids.count(id))
                throw InputError("declared sizes name unknown batch '" + id + "'");
        }
    }
    return batches;
}

class TraceFile {
public:
    explicit TraceFile(const fs::path& p) : out_(p)
    {
        if (!out_)
            throw InputError("cannot write " + p.string());
        out_ << "step,assertion,T,mu,eta,u\n";
    }
    void operator()(std::int64_t step, std::size_t k, double T, double mu, double eta, double u)
    {
        out_ << step << ',' << k << ',' << csv::format_double(T) << ',' << csv::format_double(mu) << ','
             << csv::format_double(eta) << ',' << csv::format_double(u) << '\n';
    }

private:
    std::ofstream out_;
};

template <class Work>
void parallel_for(std::size_t count, unsigned threads, Work work)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i; (i = next++) < count;) {
            try {
                work(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = count;
            }
        }
    };
    if (threads <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(run);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed, std::uint64_t trials,
    unsigned threads, const std::optional<fs::path>& trace_dir)
{
    const auto& contest = cfg.knesset.contest;
    const auto base = load_batches(cfg, seed);
    const Tally truth = total_truth(base, contest);
    if (trace_dir)
        fs::create_directories(*trace_dir);

    ExperimentResult result;
    result.total_ballots = truth.total();
    const std::size_t A = cfg.audits.size();
    result.reports.resize(static_cast<std::size_t>(trials) * A);

    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        Rng err_rng = Rng::stream(seed, 2 * t);
        const auto batches = inject_ballot_errors(base, cfg.errors, contest, err_rng);
        const Tally reported = total_reported(batches, contest);
        const auto assorters = contest_assertions(cfg, reported);
        const bool correct = same_outcome(cfg, reported, truth);

        std::vector<std::int64_t> margins;
        for (const auto& a : assorters)
            margins.push_back(assertion_margin(a, truth));

        for (std::size_t k = 0; k < A; ++k) {
            const auto kind = cfg.audits[k];
            Rng rng = Rng::stream(seed, 2 * t + 1);
            AuditConfig ac = cfg.audit;
            ac.seed = seed;

            std::optional<TraceFile> trace_file;
            TraceSink sink;
            if (trace_dir) {
                trace_file.emplace(*trace_dir / (std::string("trace_") + to_string(kind) + "_" + std::to_string(t) + ".csv"));
                sink = [&](std::int64_t step, std::size_t i, const AssertionState& s) {
                    (*trace_file)(step, i, s.T, s.mu, s.eta, s.u);
                };
            }

            const auto start = std::chrono::steady_clock::now();
            TrialReport r;
            r.trial = t;
            r.seed = seed;
            r.audit = kind;
            r.reported_correct = correct;
            r.margins = margins;
            switch (kind) {
            case AuditKind::alpha: {
                const auto ballots = expand_ballots(truth);
                r.outcome = alpha_audit(ballots, assorters, reported, ac, rng, sink);
                break;
            }
            case AuditKind::alpha_batch:
                r.outcome = alpha_batch_audit(batches, assorters, reported, ac, rng, sink);
                break;
            case AuditKind::batchcomp: {
                BatchcompOptions opt;
                opt.delta = cfg.delta;
                opt.simplified = cfg.simplified;
                r.outcome = batchcomp_audit(batches, assorters, ac, rng, opt, sink);
                break;
            }
            }
            r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            result.reports[t * A + k] = std::move(r);
        }
    });
    return result;
}

std::vector<AssertionSummary> assertion_stats(const std::vector<TrialReport>& reports)
{
    std::vector<AssertionSummary> out;
    std::vector<std::vector<double>> samples;
    auto find = [&](AuditKind kind, const std::string& label) -> std::size_t {
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i].audit == kind && out[i].label == label)
                return i;
        }
        AssertionSummary s;
        s.audit = kind;
        s.label = label;
        out.push_back(s);
        samples.emplace_back();
        return out.size() - 1;
    };
    for (const auto& r : reports) {
        for (std::size_t k = 0; k < r.outcome.assertions.size(); ++k) {
            const auto& a = r.outcome.assertions[k];
            auto i = find(r.audit, a.label);
            if (k < r.margins.size())
                out[i].margin = r.margins[k];
            ++out[i].trials;
            if (a.status == AssertionStatus::approved || a.status == AssertionStatus::certain)
                ++out[i].approved;
            samples[i].push_back(static_cast<double>(a.ballots_examined));
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& x = samples[i];
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
        out[i].mean_ballots = mean;
        if (x.size() >= 2) {
            double ss = 0;
            for (double v : x)
                ss += (v - mean) * (v - mean);
            out[i].sd_ballots = std::sqrt(ss / static_cast<double>(x.size() - 1));
        }
    }
    return out;
}

namespace {

std::ofstream open_out(const fs::path& p)
{
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + p.string());
    return out;
}

std::string pct(double part, double whole)
{
    return csv::format_double(100.0 * part / whole);
}

} // namespace

void write_experiment_csv(const ExperimentResult& result, const fs::path& dir)
{
    fs::create_directories(dir);
    const double n = static_cast<double>(result.total_ballots);

    auto stats = assertion_stats(result.reports);
    {
        auto out = open_out(dir / "assertions.csv");
        out << "audit,assertion,margin,margin_pct,trials,approved,mean_ballots_examined,sd_ballots_examined,"
               "mean_pct_examined\n";
        for (const auto& s : stats) {
            out << to_string(s.audit) << ',' << csv::escape(s.label) << ',' << s.margin << ','
                << pct(static_cast<double>(s.margin), n) << ',' << s.trials << ',' << s.approved << ','
                << csv::format_double(s.mean_ballots) << ','
                << (s.sd_ballots ? csv::format_double(*s.sd_ballots) : std::string()) << ','
                << pct(s.mean_ballots, n) << '\n';
        }
    }
    {
        auto out = open_out(dir / "trials.csv");
        out << "trial,audit,reported_correct,approved,full_recount,ballots_examined,batches_examined,total_ballots,"
               "pct_examined\n";
        for (const auto& r : result.reports) {
            const auto& o = r.outcome;
            out << r.trial << ',' << to_string(r.audit) << ',' << r.reported_correct << ',' << o.approved << ','
                << o.full_recount << ',' << o.ballots_examined << ',' << o.batches_examined << ',' << o.total_ballots
                << ',' << pct(static_cast<double>(o.ballots_examined), n) << '\n';
        }
    }
    {
        auto out = open_out(dir / "trial_assertions.csv");
        out << "trial,audit,assertion,status,margin,ballots_examined,batches_examined,T_max\n";
        for (const auto& r : result.reports) {
            for (std::size_t k = 0; k < r.outcome.assertions.size(); ++k) {
                const auto& a = r.outcome.assertions[k];
                out << r.trial << ',' << to_string(r.audit) << ',' << csv::escape(a.label) << ','
                    << to_string(a.status) << ',' << (k < r.margins.size() ? r.margins[k] : 0) << ','
                    << a.ballots_examined << ',' << a.batches_examined << ',' << csv::format_double(a.T_max)
                    << '\n';
            }
        }
    }
    {
        auto out = open_out(dir / "summary.csv");
        out << "audit,trials,approved,full_recounts,mean_ballots_examined,sd_ballots_examined,mean_pct_examined\n";
        std::vector<AuditKind> kinds;
        for (const auto& r : result.reports) {
            if (std::find(kinds.begin(), kinds.end(), r.audit) == kinds.end())
                kinds.push_back(r.audit);
        }
        for (auto kind : kinds) {
            std::vector<double> x;
            std::int64_t approved = 0, recounts = 0;
            for (const auto& r : result.reports) {
                if (r.audit != kind)
                    continue;
                x.push_back(static_cast<double>(r.outcome.ballots_examined));
                approved += r.outcome.approved;
                recounts += r.outcome.full_recount;
            }
            const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
            std::string sd;
            if (x.size() >= 2) {
                double ss = 0;
                for (double v : x)
                    ss += (v - mean) * (v - mean);
                sd = csv::format_double(std::sqrt(ss / static_cast<double>(x.size() - 1)));
            }
            out << to_string(kind) << ',' << x.size() << ',' << approved << ',' << recounts << ','
                << csv::format_double(mean) << ',' << sd << ',' << pct(mean, n) << '\n';
        }
    }
}

// Census

std::vector<std::pair<District, std::optional<double>>> read_districts_csv(const fs::path& path)
{
    std::vector<std::pair<District, std::optional<double>>> out;
    for (const auto& row : csv::read_with_header(path.string(), {"district", "population", "c_constant"})) {
        District d;
        d.name = row[0];
        if (d.name.empty())
            throw InputError(path.string() + ": empty district name");
        if (!row[1].empty())
            d.population = csv::parse_int(row[1], path.string() + ": population");
        std::optional<double> c;
        if (!row[2].empty())
            c = csv::parse_double(row[2], path.string() + ": c_constant");
        out.emplace_back(d, c);
    }
    if (out.empty())
        throw InputError(path.string() + ": no districts");
    return out;
}

HouseholdSizeDistribution read_household_sizes_csv(const fs::path& path)
{
    HouseholdSizeDistribution dist;
    for (const auto& row : csv::read_with_header(path.string(), {"residents", "probability"})) {
        auto k = csv::parse_int(row[0], path.string() + ": residents");
        auto p = csv::parse_double(row[1], path.string() + ": probability");
        if (k < 0 || p < 0)
            throw InputError(path.string() + ": negative entry");
        if (dist.probabilities.size() <= static_cast<std::size_t>(k))
            dist.probabilities.resize(static_cast<std::size_t>(k) + 1, 0.0);
        dist.probabilities[static_cast<std::size_t>(k)] += p;
    }
    if (dist.probabilities.empty())
        throw InputError(path.string() + ": empty distribution");
    return dist;
}

std::vector<Household> read_households_csv(const fs::path& path, const CensusModel& model)
{
    std::vector<Household> out;
    std::unordered_set<std::string> ids;
    const std::string src = path.string();
    for (const auto& row :
        csv::read_with_header(src, {"household_id", "district", "census_count", "pes_count", "surveyed"})) {
        Household h;
        h.id = row[0];
        if (!ids.insert(h.id).second)
            throw InputError(src + ": duplicate household '" + h.id + "'");
        h.state = model.state_index(row[1]);
        h.census_count = static_cast<int>(csv::parse_int(row[2], src + ": census_count"));
        const bool surveyed = row[4] == "1" || row[4] == "true";
        if (!surveyed && row[4] != "0" && row[4] != "false")
            throw InputError(src + ": surveyed must be 0 or 1");
        if (surveyed) {
            if (row[3].empty())
                throw InputError(src + ": surveyed household '" + h.id + "' has no pes_count");
            h.pes_count = static_cast<int>(csv::parse_int(row[3], src + ": pes_count"));
        } else if (!row[3].empty()) {
            throw InputError(src + ": unsurveyed household '" + h.id + "' has a pes_count");
        }
        auto bad = [&](int g) { return g < 0 || g > model.g_max; };
        if (bad(h.census_count) || (h.pes_count && bad(*h.pes_count)))
            throw InputError(src + ": household '" + h.id + "' is outside [0, g_max]");
        out.push_back(std::move(h));
    }
    return out;
}

CensusConfig load_census_config(const fs::path& path)
{
    const json j = read_json(path);
    const fs::path base = path.parent_path();
    CensusConfig cfg;
    try {
        cfg.model.representatives = j.at("representatives").get<std::int64_t>();
        cfg.model.divisor = parse_divisor(j.value("divisor", std::string("dhondt")));
        cfg.model.g_max = j.value("g_max", 15);
        cfg.options.delta = j.value("delta", cfg.options.delta);
        cfg.options.epsilon = j.value("epsilon", cfg.options.epsilon);
        const auto nf = j.value("non_frame_pes", std::string("census_count"));
        if (nf == "zero")
            cfg.options.non_frame = NonFramePes::zero;
        else if (nf != "census_count")
            throw InputError("non_frame_pes must be census_count or zero");

        auto districts = read_districts_csv(resolve(base, j.at("districts").get<std::string>()));
        for (const auto& [d, c] : districts) {
            cfg.model.states.push_back(d.name);
            cfg.districts.push_back(d);
            cfg.model.constants.push_back(c.value_or(0.0));
        }
        if (j.contains("households")) {
            cfg.households_file = resolve(base, j["households"].get<std::string>());
            for (const auto& [d, c] : districts) {
                if (!c)
                    throw InputError("district '" + d.name + "' needs a c_constant");
            }
        }
        if (j.contains("generate")) {
            const auto& g = j["generate"];
            cfg.sizes = read_household_sizes_csv(resolve(base, g.at("household_sizes").get<std::string>()));
            cfg.nonresponse = g.value("nonresponse", cfg.nonresponse);
            cfg.disagreement = g.value("disagreement", cfg.disagreement);
            cfg.max_regenerations = g.value("max_regenerations", cfg.max_regenerations);
            for (const auto& d : cfg.districts) {
                if (d.population <= 0)
                    throw InputError("district '" + d.name + "' needs a positive population");
            }
        } else if (!cfg.households_file) {
            throw InputError("census config needs either households or generate");
        }
        cfg.model.validate();
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return cfg;
}

CensusInstance make_census_instance(const CensusConfig& cfg, Rng& rng)
{
    for (int attempt = 0; attempt < cfg.max_regenerations; ++attempt) {
        auto inst = generate_cyprus_data(cfg.districts, cfg.sizes, cfg.nonresponse, cfg.model.representatives,
            cfg.model.divisor, cfg.model.g_max, rng);
        try {
            const auto census = apportion(inst.model, census_populations(inst.model, inst.households));
            if (cfg.disagreement <= 0)
                return inst;
            for (int redraw = 0; redraw < cfg.max_regenerations; ++redraw) {
                for (std::size_t i = 0; i < inst.households.size(); ++i)
                    inst.full_pes[i] = inst.households[i].census_count;
                inject_census_disagreement(inst, cfg.sizes, cfg.disagreement, rng);
                try {
                    if (full_pes_apportionment(inst) == census)
                        return inst;
                } catch (const Error&) {
                    // tie under the PES: redraw
                }
            }
        } catch (const InputError&) {
            throw;
        } catch (const Error&) {
            // census tie: regenerate
        }
    }
    throw Error("could not generate census data whose PES allocation matches the census");
}

std::vector<CensusCurvePoint> run_census_curve(const CensusConfig& cfg, const std::vector<double>& fractions,
    std::uint64_t seed, std::uint64_t trials, unsigned threads)
{
    if (fractions.empty())
        throw InputError("empty sample-fraction grid");
    std::vector<CensusCurvePoint> points(static_cast<std::size_t>(trials) * fractions.size());
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        const std::uint64_t root = Rng::stream(seed, t).next();
        Rng data_rng = Rng::stream(root, 0);
        const auto inst = make_census_instance(cfg, data_rng);
        for (std::size_t i = 0; i < fractions.size(); ++i) {
            Rng survey_rng = Rng::stream(root, 1 + 2 * i);
            Rng audit_rng = Rng::stream(root, 2 + 2 * i);
            const auto households = survey(inst, fractions[i], survey_rng);
            auto& p = points[t * fractions.size() + i];
            p.fraction = fractions[i];
            p.trial = t;
            p.result = census_rla(inst.model, households, audit_rng, cfg.options);
        }
    });
    return points;
}

double median(std::vector<double> v)
{
    if (v.empty())
        throw Error("median of nothing");
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_census_curve_csv(const CensusConfig& cfg, const std::vector<CensusCurvePoint>& points, const fs::path& dir)
{
    fs::create_directories(dir);
    const auto& states = cfg.model.states;
    {
        auto out = open_out(dir / "curve.csv");
        out << "fraction,trial,risk_limit,households_sampled,surveyed_sampled\n";
        for (const auto& p : points) {
            out << csv::format_double(p.fraction) << ',' << p.trial << ',' << csv::format_double(p.result.risk_limit)
                << ',' << p.result.households_sampled << ',' << p.result.surveyed_sampled << '\n';
        }
    }
    {
        auto out = open_out(dir / "curve_summary.csv");
        out << "fraction,trials,median_risk_limit,mean_risk_limit,max_risk_limit\n";
        std::vector<double> fractions;
        for (const auto& p : points) {
            if (std::find(fractions.begin(), fractions.end(), p.fraction) == fractions.end())
                fractions.push_back(p.fraction);
        }
        for (double f : fractions) {
            std::vector<double> r;
            for (const auto& p : points) {
                if (p.fraction == f)
                    r.push_back(p.result.risk_limit);
            }
            out << csv::format_double(f) << ',' << r.size() << ',' << csv::format_double(median(r)) << ','
                << csv::format_double(std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size()))
                << ',' << csv::format_double(*std::max_element(r.begin(), r.end())) << '\n';
        }
    }
    {
        auto out = open_out(dir / "pairs_curve.csv");
        out << "fraction,trial,pair_s1,pair_s2,status,risk_limit\n";
        for (const auto& p : points) {
            for (const auto& pr : p.result.pairs) {
                out << csv::format_double(p.fraction) << ',' << p.trial << ',' << csv::escape(states[pr.pair.s1])
                    << ',' << csv::escape(states[pr.pair.s2]) << ',' << to_string(pr.pair.status) << ','
                    << csv::format_double(pr.risk) << '\n';
            }
        }
    }
    {
        auto out = open_out(dir / "state_risk.csv");
        out << "fraction,trial,state,risk_limit\n";
        for (const auto& p : points) {
            for (std::size_t s = 0; s < states.size(); ++s) {
                out << csv::format_double(p.fraction) << ',' << p.trial << ',' << csv::escape(states[s]) << ','
                    << csv::format_double(p.result.state_risk[s]) << '\n';
            }
        }
    }
}

void write_pair_risks_csv(const CensusModel& model, const CensusAuditResult& result, std::ostream& out)
{
    out << "pair_s1,pair_s2,risk_limit\n";
    for (const auto& pr : result.pairs) {
        out << csv::escape(model.states[pr.pair.s1]) << ',' << csv::escape(model.states[pr.pair.s2]) << ','
            << csv::format_double(pr.risk) << '\n';
    }
}

std::vector<double> parse_fraction_grid(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            throw InputError("empty item in sample-fraction grid");
        bool percent = item.back() == '%';
        if (percent)
            item.pop_back();
        double f = csv::parse_double(item, "sample fraction");
        if (percent)
            f /= 100.0;
        if (!(f >= 0.0 && f <= 1.0))
            throw InputError("sample fraction '" + item + "' is outside [0, 1]");
        out.push_back(f);
    }
    if (out.empty())
        throw InputError("empty sample-fraction grid");
    return out;
}

} // namespace rla
