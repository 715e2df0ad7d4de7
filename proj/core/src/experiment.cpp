#include "chains/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <variant>

#include "chains/analysis.hpp"
#include "chains/cftp.hpp"
#include "chains/coupling.hpp"
#include "chains/decomposition.hpp"
#include "chains/errors.hpp"
#include "chains/rng.hpp"
#include "chains/version.hpp"

namespace chains {

namespace {

using nlohmann::json;

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidParams(std::string("bad value for '") + key + "'");
    }
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string iso_now() {
    const std::time_t tt = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidParams("cannot open output file: " + path.string());
    out << content;
}

json quantity_json(double v) {
    if (std::isfinite(v)) return json(v);
    return json();  // JSON has no infinities; the text field carries them
}

json diagnostics_json(const UpdateDiagnostics& d) {
    return json{{"updates", d.updates},
                {"ambiguity_events", d.ambiguity_events},
                {"residual_labels", d.residual_labels},
                {"absorption_rechecks", d.absorption_rechecks},
                {"absorption_failures", d.absorption_failures}};
}

Decomposition build_decomposition(const ExperimentConfig& config) {
    KernelSpec spec = config.kernel;
    if (auto* bk = std::get_if<BkSpec>(&spec); bk && config.decomposition.J != -1)
        bk->truncation_depth = config.decomposition.J;
    Kernel kernel(std::move(spec));
    const std::string& mode = config.decomposition.mode;
    if (mode == "discrete") return bk_decompose(kernel);
    if (mode == "greedy") return greedy_decompose(kernel, config.decomposition.K);
    if (std::holds_alternative<BkSpec>(config.kernel)) return bk_decompose(kernel);
    return greedy_decompose(kernel, config.decomposition.K);
}

Past random_past(rng::SubStream& g, int s) {
    const std::size_t len = static_cast<std::size_t>(g.next_u64() % 13);
    std::vector<Symbol> prefix(len);
    for (auto& a : prefix) a = static_cast<Symbol>(1 + g.next_u64() % static_cast<std::uint64_t>(s));
    const auto tail = static_cast<Symbol>(1 + g.next_u64() % static_cast<std::uint64_t>(s));
    return Past(std::move(prefix), tail);
}

json theta_histogram(const std::vector<long long>& thetas) {
    std::map<long long, long long> hist;
    for (const long long t : thetas) ++hist[t];
    json arr = json::array();
    for (const auto& [t, c] : hist) arr.push_back(json::array({t, c}));
    return arr;
}

int cmd_sample(const ExperimentConfig& config, json& report, const std::filesystem::path& dir) {
    const Decomposition dec = build_decomposition(config);
    CftpOptions opt;
    opt.horizon = config.run.horizon_limit;
    const CftpRun run = sample_stationary(dec, config.run.n, config.run.seed, opt);

    std::string csv = "time,symbol,theta\n";
    for (std::size_t i = 0; i < run.window.size(); ++i) {
        csv += std::to_string(i);
        csv += ',';
        csv += std::to_string(static_cast<int>(run.window[i]));
        csv += ',';
        csv += std::to_string(run.theta[i]);
        csv += '\n';
    }
    write_text(dir / "sample.csv", csv);

    report["n_requested"] = config.run.n;
    report["n_emitted"] = run.window.size();
    report["complete"] = run.complete;
    report["exceeded_at"] = run.exceeded_at;
    report["horizon"] = run.horizon;
    report["max_theta"] = run.max_theta;
    report["mean_theta"] = run.mean_theta;
    report["labels_materialized"] = run.labels_materialized;
    report["theta_histogram"] = theta_histogram(run.theta);
    report["diagnostics"] = diagnostics_json(run.diagnostics);

    std::printf("sample: n=%lld emitted=%zu complete=%d max_theta=%lld mean_theta=%.3f\n",
                config.run.n, run.window.size(), run.complete ? 1 : 0, run.max_theta,
                run.mean_theta);
    return run.complete ? 0 : 2;
}

int cmd_theta(const ExperimentConfig& config, json& report, const std::filesystem::path& dir) {
    const Decomposition dec = build_decomposition(config);
    CftpOptions opt;
    opt.horizon = config.run.horizon_limit;

    std::string csv = "replica,coalesced,theta,value\n";
    std::vector<long long> coalesced_thetas;
    UpdateDiagnostics diag;
    long long censored = 0;
    double mean_capped = 0.0;
    long long max_theta = 0;
    for (long long rep = 0; rep < config.run.replicas; ++rep) {
        LabelStream labels(dec, rng::derive(config.run.seed, static_cast<std::uint64_t>(rep)));
        const ThetaResult res = theta(dec, labels, 0, opt, &diag);
        if (res.coalesced) {
            coalesced_thetas.push_back(res.theta);
            max_theta = std::max(max_theta, res.theta);
        } else {
            ++censored;
        }
        mean_capped += static_cast<double>(res.theta);
        csv += std::to_string(rep);
        csv += ',';
        csv += res.coalesced ? '1' : '0';
        csv += ',';
        csv += std::to_string(res.theta);
        csv += ',';
        csv += std::to_string(static_cast<int>(res.value));
        csv += '\n';
    }
    write_text(dir / "theta.csv", csv);
    mean_capped /= static_cast<double>(config.run.replicas);
    const double survival =
        static_cast<double>(censored) / static_cast<double>(config.run.replicas);

    report["replicas"] = config.run.replicas;
    report["horizon"] = config.run.horizon_limit;
    report["censored"] = censored;
    report["survival_at_horizon"] = survival;
    report["mean_theta_capped"] = mean_capped;  // censored runs enter at the horizon
    report["max_coalesced_theta"] = max_theta;
    report["theta_histogram"] = theta_histogram(coalesced_thetas);
    report["diagnostics"] = diagnostics_json(diag);

    std::printf("theta: replicas=%lld mean_capped=%.3f max=%lld censored=%lld survival=%.4f\n",
                config.run.replicas, mean_capped, max_theta, censored, survival);
    return censored > 0 ? 2 : 0;
}

int cmd_decompose(const ExperimentConfig& config, json& report, const std::filesystem::path& dir) {
    const Decomposition dec = build_decomposition(config);
    const bool discrete = dec.mode() == DecompositionMode::discrete;

    json levels = json::array();
    std::string csv = "level,weight,intervals\n";
    for (const long long level : dec.levels()) {
        const double w = dec.weight(level);
        const long long intervals = static_cast<long long>(dec.level_intervals(level).size());
        levels.push_back(json{{"level", level}, {"weight", w}, {"intervals", intervals}});
        csv += std::to_string(level);
        csv += ',';
        csv += fmt_g(w);
        csv += ',';
        csv += std::to_string(intervals);
        csv += '\n';
    }
    write_text(dir / "levels.csv", csv);

    report["mode"] = discrete ? "discrete" : "hybrid";
    report["depth"] = dec.depth();
    report["residual"] = dec.residual();
    report["monotone_verified"] = dec.monotone_verified();
    report["levels"] = levels;
    report["truncation_residual"] = dec.kernel().truncation_residual();
    if (discrete) report["label_entropy"] = dec.label_entropy();

    std::printf("decompose: mode=%s depth=%lld residual=%.3g levels=%zu\n",
                discrete ? "discrete" : "hybrid", dec.depth(), dec.residual(),
                dec.levels().size());
    return 0;
}

int cmd_coupling_check(const ExperimentConfig& config, json& report,
                       const std::filesystem::path& dir) {
    const Kernel kernel{config.kernel};
    const int s = kernel.alphabet_size();
    const long long trials = config.run.replicas;

    const AttractivenessReport att =
        check_attractive(kernel, static_cast<long>(trials), config.run.seed);

    rng::SubStream g(config.run.seed, 0x434f5550ull);
    double max_marginal = 0.0, max_offdiag = 0.0, max_below = 0.0;
    for (long long t = 0; t < trials; ++t) {
        const Past x = random_past(g, s);
        const Past y = random_past(g, s);
        const CellTable tab = coupling_joint(kernel, x.view(), y.view());
        const CouplingMarginals marg = coupling_marginals(tab);
        for (int a = 1; a <= s; ++a) {
            max_marginal = std::max(
                max_marginal,
                std::abs(marg.left[static_cast<std::size_t>(a - 1)] - kernel.prob(a, x.view())));
            max_marginal = std::max(
                max_marginal,
                std::abs(marg.right[static_cast<std::size_t>(a - 1)] - kernel.prob(a, y.view())));
        }
        const CellTable diag = coupling_joint(kernel, x.view(), x.view());
        for (int a = 1; a <= s; ++a)
            for (int b = 1; b <= s; ++b)
                if (a != b) max_offdiag = std::max(max_offdiag, diag.at(a, b));
        if (kernel.attractive()) {
            const Past lo = meet(x.view(), y.view());
            const Past hi = join(x.view(), y.view());
            const CellTable ordered = coupling_joint(kernel, lo.view(), hi.view());
            for (int a = 1; a <= s; ++a)
                for (int b = 1; b < a; ++b) max_below = std::max(max_below, ordered.at(a, b));
        }
    }

    const Past bottom = Past::constant(Symbol{1});
    const Past top = Past::constant(static_cast<Symbol>(s));
    write_text(dir / "joint.csv", coupling_joint(kernel, bottom.view(), top.view()).to_csv());

    report["trials"] = trials;
    report["attractive"] = json{{"passed", att.passed},
                                {"pairs_checked", att.pairs_checked},
                                {"violations", att.violations.size()}};
    report["max_marginal_error"] = max_marginal;
    report["max_offdiagonal_identical"] = max_offdiag;
    report["max_below_diagonal_ordered"] = max_below;

    std::printf(
        "coupling-check: attractive=%d trials=%lld marginal_err=%.3g offdiag=%.3g below=%.3g\n",
        att.passed ? 1 : 0, trials, max_marginal, max_offdiag, max_below);
    return 0;
}

int cmd_phases(const ExperimentConfig& config, json& report, const std::filesystem::path& dir,
               int workers) {
    const Decomposition dec = build_decomposition(config);
    const long long horizon = config.run.horizon_limit;

    std::vector<long long> grid;
    for (long long v = 1; v < horizon; v *= 2) grid.push_back(v);
    grid.push_back(horizon);

    const SurvivalCurve curve =
        coalescence_curve(dec, horizon, config.run.replicas, grid, config.run.seed, workers);
    const PhaseGap gap = phase_gap(dec.kernel(), grid, config.run.replicas,
                                   config.run.seed, workers);

    std::map<long long, SurvivalPoint> by_n;
    for (const auto& p : curve.points) by_n[p.n] = p;
    std::map<long long, PhaseGapPoint> gap_by_n;
    for (const auto& p : gap.points) gap_by_n[p.n] = p;

    std::string csv = "n,survival,survival_se,gap,gap_se\n";
    json points = json::array();
    for (const long long n : grid) {
        const SurvivalPoint sp = by_n.count(n) ? by_n[n] : SurvivalPoint{};
        const PhaseGapPoint gp = gap_by_n.count(n) ? gap_by_n[n] : PhaseGapPoint{};
        csv += std::to_string(n);
        csv += ',';
        csv += fmt_g(sp.survival);
        csv += ',';
        csv += fmt_g(sp.se);
        csv += ',';
        csv += fmt_g(gp.gap);
        csv += ',';
        csv += fmt_g(gp.se);
        csv += '\n';
        points.push_back(json{{"n", n},
                              {"survival", sp.survival},
                              {"survival_se", sp.se},
                              {"gap", gp.gap},
                              {"gap_se", gp.se}});
    }
    write_text(dir / "phases.csv", csv);

    report["replicas"] = config.run.replicas;
    report["horizon"] = horizon;
    report["censored"] = curve.censored;
    report["survival_at_horizon"] =
        static_cast<double>(curve.censored) / static_cast<double>(config.run.replicas);
    report["points"] = points;

    std::printf("phases: replicas=%lld horizon=%lld survival=%.4f gap=%.4f\n",
                config.run.replicas, horizon,
                static_cast<double>(curve.censored) / static_cast<double>(config.run.replicas),
                gap.points.empty() ? 0.0 : gap.points.back().gap);
    return 0;
}

int cmd_concentration(const ExperimentConfig& config, json& report,
                      const std::filesystem::path& dir) {
    const Decomposition dec = build_decomposition(config);
    const int s = dec.alphabet_size();
    const long long n = config.run.n;
    CftpOptions opt;
    opt.horizon = config.run.horizon_limit;

    std::vector<double> values;
    std::vector<double> replica_mean_theta;
    std::vector<long long> pooled_theta;
    UpdateDiagnostics diag;
    long long censored = 0;
    for (long long rep = 0; rep < config.run.replicas; ++rep) {
        const CftpRun run =
            sample_stationary(dec, n, rng::derive(config.run.seed, static_cast<std::uint64_t>(rep)), opt);
        diag.updates += run.diagnostics.updates;
        diag.ambiguity_events += run.diagnostics.ambiguity_events;
        diag.residual_labels += run.diagnostics.residual_labels;
        diag.absorption_rechecks += run.diagnostics.absorption_rechecks;
        diag.absorption_failures += run.diagnostics.absorption_failures;
        if (!run.complete) {
            ++censored;
            continue;
        }
        double v = 0.0;
        if (config.analysis.functional == "single_site") {
            v = static_cast<double>(2 * run.window.front() - s - 1);
        } else {
            for (const Symbol a : run.window) v += static_cast<double>(2 * a - s - 1);
            v /= static_cast<double>(n);
        }
        values.push_back(v);
        replica_mean_theta.push_back(run.mean_theta);
        pooled_theta.insert(pooled_theta.end(), run.theta.begin(), run.theta.end());
    }

    const double site_osc = 2.0 * static_cast<double>(s - 1);
    const LipschitzSpec spec = config.analysis.functional == "single_site"
                                   ? LipschitzSpec::single_site(n, 1, site_osc)
                                   : LipschitzSpec::block_mean(n, 1, site_osc);

    double theta_mean = 0.0, theta_sd = 0.0, theta_mean_upper = 0.0;
    if (!replica_mean_theta.empty()) {
        for (const double m : replica_mean_theta) theta_mean += m;
        theta_mean /= static_cast<double>(replica_mean_theta.size());
        if (replica_mean_theta.size() > 1) {
            for (const double m : replica_mean_theta)
                theta_sd += (m - theta_mean) * (m - theta_mean);
            theta_sd = std::sqrt(theta_sd / static_cast<double>(replica_mean_theta.size() - 1));
        }
        theta_mean_upper = theta_mean + 1.959963984540054 * theta_sd /
                                            std::sqrt(static_cast<double>(replica_mean_theta.size()));
    }

    long long max_theta = 0;
    for (const long long t : pooled_theta) max_theta = std::max(max_theta, t);
    const long long tail_depth = std::min<long long>(max_theta, 4096);
    ThetaTail tail;
    long long r_stop = 0;
    if (!pooled_theta.empty()) {
        tail = ThetaTail::from_sample(pooled_theta, tail_depth);
        std::vector<long long> sorted(pooled_theta);
        std::sort(sorted.begin(), sorted.end());
        r_stop = std::min<long long>(sorted[static_cast<std::size_t>(
                                         0.99 * static_cast<double>(sorted.size() - 1))],
                                     tail_depth);
    }

    json eps_entries = json::array();
    std::string csv =
        "epsilon,exceed,fraction,wilson_lo,wilson_hi,bound_raw,bound_capped,bound_inflated_raw,"
        "bound_inflated_capped\n";
    for (const double eps : config.analysis.epsilons) {
        json entry{{"epsilon", eps}};
        const BoundValue plug = cftp_concentration_bound(theta_mean, eps, spec);
        const BoundValue infl = cftp_concentration_bound(theta_mean_upper, eps, spec);
        entry["bound_plugin"] = json{{"raw", plug.raw}, {"capped", plug.capped}};
        entry["bound_inflated"] = json{{"raw", infl.raw}, {"capped", infl.capped}};
        if (!pooled_theta.empty()) {
            const FpBound fp = fp_concentration_bound(tail, r_stop, r_stop, eps, spec);
            entry["finite_stop"] = json{{"r1", r_stop},
                                        {"r2", r_stop},
                                        {"premise_ok", fp.premise_ok},
                                        {"premise_lhs", fp.premise_lhs},
                                        {"premise_rhs", fp.premise_rhs},
                                        {"raw", fp.bound.raw},
                                        {"capped", fp.bound.capped}};
        }
        double frac = 0.0, wlo = 0.0, whi = 0.0;
        long long exceed = 0;
        if (values.size() >= 100) {
            const DeviationEstimate est = empirical_deviation(values, eps);
            exceed = est.exceed;
            frac = est.fraction;
            wlo = est.wilson_lo;
            whi = est.wilson_hi;
            entry["empirical"] = json{{"runs", est.runs},
                                      {"exceed", est.exceed},
                                      {"fraction", est.fraction},
                                      {"wilson_lo", est.wilson_lo},
                                      {"wilson_hi", est.wilson_hi},
                                      {"sample_mean", est.sample_mean}};
        } else {
            entry["empirical"] = nullptr;  // fewer than 100 usable replicas
        }
        eps_entries.push_back(entry);
        csv += fmt_g(eps);
        csv += ',' + std::to_string(exceed);
        csv += ',' + fmt_g(frac);
        csv += ',' + fmt_g(wlo);
        csv += ',' + fmt_g(whi);
        csv += ',' + fmt_g(plug.raw);
        csv += ',' + fmt_g(plug.capped);
        csv += ',' + fmt_g(infl.raw);
        csv += ',' + fmt_g(infl.capped);
        csv += '\n';
    }
    write_text(dir / "concentration.csv", csv);

    report["replicas"] = config.run.replicas;
    report["usable_replicas"] = values.size();
    report["censored"] = censored;
    report["n"] = n;
    report["functional"] = config.analysis.functional;
    report["theta_mean"] = theta_mean;
    report["theta_mean_upper95"] = theta_mean_upper;
    report["epsilons"] = eps_entries;
    report["diagnostics"] = diagnostics_json(diag);

    std::printf("concentration: replicas=%lld usable=%zu theta_mean=%.3f upper=%.3f\n",
                config.run.replicas, values.size(), theta_mean, theta_mean_upper);
    return censored > 0 ? 2 : 0;
}

int cmd_entropy_rate(const ExperimentConfig& config, json& report,
                     const std::filesystem::path& dir) {
    const Decomposition dec = build_decomposition(config);
    const int s = dec.alphabet_size();
    if (config.run.replicas < 2) throw InvalidParams("entropy-rate needs at least 2 replicas");
    CftpOptions opt;
    opt.horizon = config.run.horizon_limit;

    std::vector<std::vector<Symbol>> windows;
    long long censored = 0;
    for (long long rep = 0; rep < config.run.replicas; ++rep) {
        CftpRun run = sample_stationary(dec, config.run.n,
                                        rng::derive(config.run.seed, static_cast<std::uint64_t>(rep)),
                                        opt);
        if (!run.complete) {
            ++censored;
            continue;
        }
        windows.push_back(std::move(run.window));
    }
    if (windows.size() < 2) throw InvalidParams("too few complete replicas for the estimate");
    const std::size_t half = windows.size() / 2;

    json kl_entries = json::array();
    std::string csv = "block,rate,bias_floor,blocks_x,blocks_y\n";
    for (long long b = 0; b <= config.analysis.block; ++b) {
        const long long width = b + 1;
        std::vector<Symbol> xs, ys;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            const auto& w = windows[i];
            const std::size_t use =
                (w.size() / static_cast<std::size_t>(width)) * static_cast<std::size_t>(width);
            auto& dst = i < half ? xs : ys;
            dst.insert(dst.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(use));
        }
        const KlEstimate est = relative_entropy_rate(xs, ys, s, b);
        kl_entries.push_back(json{{"block", b},
                                  {"rate", est.rate},
                                  {"bias_floor", est.bias_floor},
                                  {"blocks_x", est.blocks_x},
                                  {"blocks_y", est.blocks_y},
                                  {"cells", est.cells}});
        csv += std::to_string(b);
        csv += ',' + fmt_g(est.rate);
        csv += ',' + fmt_g(est.bias_floor);
        csv += ',' + std::to_string(est.blocks_x);
        csv += ',' + std::to_string(est.blocks_y);
        csv += '\n';
    }
    write_text(dir / "entropy.csv", csv);

    const bool discrete = dec.mode() == DecompositionMode::discrete;
    if (discrete)
        report["label_entropy"] = dec.label_entropy();
    else
        report["label_entropy"] = nullptr;
    report["replicas"] = config.run.replicas;
    report["censored"] = censored;
    report["relative_entropy"] = kl_entries;

    std::printf("entropy-rate: windows=%zu label_entropy=%s kl_max_block=%lld\n", windows.size(),
                discrete ? fmt_g(dec.label_entropy()).c_str() : "n/a", config.analysis.block);
    return censored > 0 ? 2 : 0;
}

int cmd_criteria(const ExperimentConfig& config, json& report, const std::filesystem::path& dir) {
    const Kernel kernel{config.kernel};
    const UniquenessReport rep = uniqueness_criteria(kernel);

    auto entry = [](const CriterionResult& c) {
        return json{{"verdict", to_string(c.verdict)},
                    {"quantity", quantity_json(c.quantity)},
                    {"quantity_text", fmt_g(c.quantity)},
                    {"note", c.note}};
    };
    report["family"] = kernel.family();
    report["attractive"] = kernel.attractive();
    report["decay_exponent"] = entry(rep.decay_exponent);
    report["oscillation_sum"] = entry(rep.oscillation_sum);
    report["product_divergence"] = entry(rep.product_divergence);

    std::string csv = "depth,var_bound,var_sharp,osc_bound\n";
    for (long long k = 0; k <= 64; ++k) {
        csv += std::to_string(k);
        csv += ',' + fmt_g(kernel.var_bound(static_cast<std::uint64_t>(k)));
        csv += ',' + fmt_g(kernel.var_sharp(static_cast<std::uint64_t>(k)));
        csv += ',';
        csv += k >= 1 ? fmt_g(kernel.osc_bound(static_cast<std::uint64_t>(k))) : "nan";
        csv += '\n';
    }
    write_text(dir / "criteria.csv", csv);

    std::printf("criteria: decay=%s oscillation=%s product=%s\n",
                to_string(rep.decay_exponent.verdict), to_string(rep.oscillation_sum.verdict),
                to_string(rep.product_divergence.verdict));
    return 0;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidParams(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw InvalidParams("config must be a JSON object");
    ExperimentConfig c;
    if (j.contains("kernel")) c.kernel = kernel_spec_from_json(j.at("kernel").dump());
    if (j.contains("decomposition")) {
        const json& d = j.at("decomposition");
        c.decomposition.mode = field_or<std::string>(d, "mode", c.decomposition.mode);
        c.decomposition.K = field_or<int>(d, "K", c.decomposition.K);
        c.decomposition.J = field_or<int>(d, "J", c.decomposition.J);
    }
    if (j.contains("run")) {
        const json& r = j.at("run");
        c.run.n = field_or<long long>(r, "n", c.run.n);
        c.run.replicas = field_or<long long>(r, "replicas", c.run.replicas);
        c.run.horizon_limit = field_or<long long>(r, "horizon_limit", c.run.horizon_limit);
        c.run.seed = field_or<std::uint64_t>(r, "seed", c.run.seed);
    }
    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        c.analysis.epsilons = field_or<std::vector<double>>(a, "epsilons", c.analysis.epsilons);
        c.analysis.functional = field_or<std::string>(a, "functional", c.analysis.functional);
        c.analysis.block = field_or<long long>(a, "block", c.analysis.block);
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidParams("cannot read config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["kernel"] = json::parse(kernel_spec_to_json(kernel));
    j["decomposition"] =
        json{{"mode", decomposition.mode}, {"K", decomposition.K}, {"J", decomposition.J}};
    j["run"] = json{{"n", run.n},
                    {"replicas", run.replicas},
                    {"horizon_limit", run.horizon_limit},
                    {"seed", run.seed}};
    j["analysis"] = json{{"epsilons", analysis.epsilons},
                         {"functional", analysis.functional},
                         {"block", analysis.block}};
    return j.dump(2);
}

std::string ExperimentConfig::digest() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json())));
    return buf;
}

void ExperimentConfig::validate() const {
    const Kernel probe{kernel};  // family parameters validate on construction
    (void)probe;
    if (decomposition.mode != "auto" && decomposition.mode != "discrete" &&
        decomposition.mode != "greedy")
        throw InvalidParams("decomposition mode must be auto, discrete, or greedy");
    if (decomposition.K < 0 || decomposition.K > 12)
        throw InvalidParams("greedy depth K must be in [0, 12]");
    if (run.n < 1) throw InvalidParams("run.n must be >= 1");
    if (run.replicas < 1) throw InvalidParams("run.replicas must be >= 1");
    if (run.horizon_limit < 1) throw InvalidParams("run.horizon_limit must be >= 1");
    if (analysis.epsilons.empty()) throw InvalidParams("analysis.epsilons must be nonempty");
    for (const double e : analysis.epsilons)
        if (!(e > 0.0)) throw InvalidParams("every epsilon must be > 0");
    if (analysis.functional != "mean" && analysis.functional != "single_site")
        throw InvalidParams("functional preset must be mean or single_site");
    if (analysis.block < 0 || analysis.block > 12)
        throw InvalidParams("analysis.block must be in [0, 12]");
    if (analysis.block + 1 > run.n)
        throw InvalidParams("analysis.block + 1 must not exceed run.n");
}

int run_subcommand(const std::string& name, const ExperimentConfig& config,
                   const std::string& out_dir, int workers) {
    if (workers < 1) throw InvalidParams("workers must be >= 1");
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    json report;
    report["subcommand"] = name;
    report["library_version"] = version;
    report["config_digest"] = config.digest();
    report["config"] = json::parse(config.to_json());
    report["seed"] = config.run.seed;
    report["workers"] = workers;

    int code = 0;
    if (name == "sample")
        code = cmd_sample(config, report, dir);
    else if (name == "theta")
        code = cmd_theta(config, report, dir);
    else if (name == "decompose")
        code = cmd_decompose(config, report, dir);
    else if (name == "coupling-check")
        code = cmd_coupling_check(config, report, dir);
    else if (name == "phases")
        code = cmd_phases(config, report, dir, workers);
    else if (name == "concentration")
        code = cmd_concentration(config, report, dir);
    else if (name == "entropy-rate")
        code = cmd_entropy_rate(config, report, dir);
    else if (name == "criteria")
        code = cmd_criteria(config, report, dir);
    else
        throw InvalidParams("unknown subcommand: " + name);

    report["exit_code"] = code;
    report["timestamp"] = iso_now();
    write_text(dir / "report.json", report.dump(2) + "\n");
    return code;
}

}  // namespace chains
