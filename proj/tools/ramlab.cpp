// ramlab: ramification invariants and normal basis experiments on totally
// ramified elementary abelian p-extensions, driven by scenario files.
//
// Exit codes: 0 pass, 1 mathematical violation, 2 inconclusive at the
// precision cap, 3 invalid input.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ramlab/report.hpp"

using namespace ramlab;

namespace {

struct CommonArgs {
    std::string scenario_path;
    std::string out;
    i64 precision = 0;
    i64 precision_cap = 0;
    bool has_precision = false;
    bool has_cap = false;
};

void add_common(CLI::App* sub, CommonArgs& a) {
    sub->add_option("scenario", a.scenario_path, "scenario file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", a.out, "write the JSON report to this path");
    sub->add_option("--precision", a.precision,
                    "working precision in uniformizer digits");
    sub->add_option("--precision-cap", a.precision_cap,
                    "ceiling for automatic precision escalation");
}

i64 env_cap() {
    const char* env = std::getenv("RAMLAB_PRECISION_CAP");
    if (!env) return 1024;
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0' || v < 8)
        throw InputError("RAMLAB_PRECISION_CAP must be an integer >= 8");
    return static_cast<i64>(v);
}

// precedence: flag > [run] section > environment > built-in default
i64 resolve_cap(const Scenario& sc, const CommonArgs& a) {
    if (a.has_cap) return a.precision_cap;
    if (sc.run.precision_cap) return *sc.run.precision_cap;
    return env_cap();
}

i64 resolve_precision(const Scenario& sc, const CommonArgs& a) {
    if (a.has_precision) return a.precision;
    if (sc.run.precision) return *sc.run.precision;
    return sc.default_precision;
}

void emit(const Json& rep, const std::string& out) {
    if (out.empty()) {
        std::cout << rep.dump(2) << "\n";
    } else {
        std::ofstream f(out);
        if (!f) throw InputError("cannot open output path " + out);
        f << rep.dump(2) << "\n";
    }
}

// Runs the verb body, doubling the working precision on inconclusive
// outcomes until the cap.  The body rebuilds the report from scratch each
// attempt, so the emitted document reflects the final precision only, plus
// the trail of attempts.
template <typename Body>
int with_escalation(const Scenario& sc, i64 precision, i64 cap, Json& rep,
                    Body&& body) {
    if (cap < precision) cap = precision;
    Json trail = Json::array();
    while (true) {
        trail.push_back(precision);
        ContextOptions opt;
        opt.precision = precision;
        opt.precision_cap = cap;
        const LabContext ctx = build_context(sc, opt);
        int code = 2;
        std::string reason = "precision cap reached";
        try {
            code = body(ctx, rep);
        } catch (const PrecisionError& e) {
            reason = e.what();
            code = 2;
        }
        if (code != 2) {
            rep["precision_trail"] = trail;
            return code;
        }
        if (precision >= cap) {
            if (rep.is_null()) rep = Json::object();
            rep["precision_trail"] = trail;
            rep["verdict"] = "inconclusive";
            rep["inconclusive_reason"] = reason;
            return 2;
        }
        precision = std::min(precision * 2, cap);
    }
}

int cmd_build(const LabContext& ctx, Json& rep) {
    rep = report_skeleton("build", ctx, ctx.scenario.run.seed,
                          ctx.scenario.run.trials);
    std::vector<ExtensionLayerSpec> layers;
    layers.reserve(ctx.scenario.layers.size());
    for (const auto& l : ctx.scenario.layers)
        layers.push_back({l.kind, ctx.F.from_digits(l.datum)});
    rep["validation"] = validation_json(validate_extension(ctx.F, layers));
    const auto vpi = ctx.N.n_valuation(ctx.N.uniformizer());
    rep["uniformizer_valuation"] = vpi ? Json(*vpi) : Json(nullptr);
    rep["verdict"] = "pass";
    return 0;
}

int cmd_ramify(const LabContext& ctx, Json& rep) {
    rep = report_skeleton("ramify", ctx, ctx.scenario.run.seed,
                          ctx.scenario.run.trials);
    rep["ramification"] = ramification_json(ctx.data, ctx.precision);
    const auto checks = structural_checks(ctx.data, "scenario");
    rep["structural_checks"] = structural_json(checks);
    rep["hypothesis"] = hypothesis_json(check_hypothesis(ctx.data));
    bool ok = true;
    for (const auto& c : checks) ok = ok && c.pass;
    rep["verdict"] = ok ? "pass" : "fail";
    return ok ? 0 : 1;
}

int cmd_nbtest(const LabContext& ctx, Json& rep, i64 valuation, i64 trials,
               u64 seed) {
    rep = report_skeleton("nbtest", ctx, seed, trials);
    rep["parameters"]["valuation"] = valuation;
    rep["ramification"] = ramification_json(ctx.data, ctx.precision);

    const auto& d = ctx.data;
    const bool in_class =
        (((valuation - d.b_max) % d.degree) + d.degree) % d.degree == 0;
    const char* prediction =
        d.hypothesis_ok && in_class
            ? "every element of this class generates a normal basis"
            : in_class ? "class matches b_max but an upper break is divisible "
                         "by p; generation is not asserted"
                       : "no uniform prediction for this class; constructed "
                         "non-generators come from the rhov verb";
    rep["prediction"] = prediction;

    const SweepReport sw = sweep_class(ctx.N, valuation, trials, seed);
    rep["sweep"] = sweep_json(sw);
    if (sw.inconclusive > 0) return 2;
    const bool violated = d.hypothesis_ok && in_class && sw.non_generator > 0;
    rep["verdict"] = violated ? "fail" : "pass";
    return violated ? 1 : 0;
}

int cmd_rhov(const LabContext& ctx, Json& rep, i64 valuation) {
    rep = report_skeleton("rhov", ctx, ctx.scenario.run.seed,
                          ctx.scenario.run.trials);
    rep["parameters"]["valuation"] = valuation;
    rep["ramification"] = ramification_json(ctx.data, ctx.precision);
    rep["hypothesis"] = hypothesis_json(check_hypothesis(ctx.data));
    const RhoVCertificate cert = construct_rho_v(ctx.N, ctx.data, valuation);
    rep["certificate"] = certificate_json(cert);
    const bool ok = cert.checks.valuation_ok && cert.checks.trace_zero &&
                    cert.checks.nb_status == NbStatus::non_generator;
    rep["verdict"] = ok ? "pass" : "fail";
    return ok ? 0 : 1;
}

int cmd_verify(const LabContext& ctx, Json& rep, const std::string& suite,
               i64 trials, u64 seed) {
    rep = report_skeleton("verify", ctx, seed, trials);
    rep["parameters"]["suite"] = suite;
    rep["ramification"] = ramification_json(ctx.data, ctx.precision);
    rep["hypothesis"] = hypothesis_json(check_hypothesis(ctx.data));

    const auto results = run_suites(ctx, suite, trials, seed);
    Json arr = Json::array();
    bool hard_fail = false, any_inconclusive = false;
    for (const auto& r : results) {
        arr.push_back(suite_json(r));
        for (const auto& c : r.checks) {
            if (c.inconclusive)
                any_inconclusive = true;
            else if (!c.pass)
                hard_fail = true;
        }
    }
    rep["suites"] = arr;
    if (hard_fail) {
        rep["verdict"] = "fail";
        return 1;
    }
    if (any_inconclusive) return 2;
    rep["verdict"] = "pass";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "ramification invariants and normal basis experiments for totally "
        "ramified elementary abelian p-extensions of local fields"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("ramlab ") + kToolVersion);

    CommonArgs args;
    i64 valuation = 0;
    bool has_valuation = false;
    i64 trials = 0;
    bool has_trials = false;
    u64 seed = 0;
    bool has_seed = false;
    std::string suite = "all";

    auto* build = app.add_subcommand(
        "build", "construct the field tower and the extension, then validate");
    add_common(build, args);

    auto* ramify = app.add_subcommand(
        "ramify", "compute the ramification filtration and its invariants");
    add_common(ramify, args);

    auto* nbtest = app.add_subcommand(
        "nbtest", "sweep random elements of one valuation class through the "
                  "normal basis test");
    add_common(nbtest, args);
    nbtest->add_option("--valuation", valuation,
                       "valuation of the sampled elements (default: b_max)");
    nbtest->add_option("--trials", trials, "number of sampled elements");
    nbtest->add_option("--seed", seed, "master seed for the sweep");

    auto* rhov = app.add_subcommand(
        "rhov", "construct a certified trace-zero non-generator at the given "
                "valuation");
    add_common(rhov, args);
    rhov->add_option("--valuation", valuation,
                     "target valuation; must lie outside the normal basis class")
        ->required();

    auto* verify = app.add_subcommand("verify", "run a property suite");
    add_common(verify, args);
    verify
        ->add_option("--suite", suite,
                     "trace-law, subfield-trace, structural, class-dichotomy "
                     "or all")
        ->required();
    verify->add_option("--trials", trials, "samples per check");
    verify->add_option("--seed", seed, "master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    CLI::App* sub = app.get_subcommands().front();
    args.has_precision = sub->count("--precision") > 0;
    args.has_cap = sub->count("--precision-cap") > 0;
    if (sub == nbtest || sub == rhov)
        has_valuation = sub->count("--valuation") > 0;
    if (sub == nbtest || sub == verify) {
        has_trials = sub->count("--trials") > 0;
        has_seed = sub->count("--seed") > 0;
    }

    const auto t0 = std::chrono::steady_clock::now();
    Json rep;
    int code = 3;
    try {
        const Scenario sc = load_scenario(args.scenario_path);
        const i64 precision = resolve_precision(sc, args);
        const i64 cap = resolve_cap(sc, args);
        const i64 eff_trials = has_trials ? trials : sc.run.trials;
        const u64 eff_seed = has_seed ? seed : sc.run.seed;

        if (sub == build) {
            code = with_escalation(sc, precision, cap, rep, cmd_build);
        } else if (sub == ramify) {
            code = with_escalation(sc, precision, cap, rep, cmd_ramify);
        } else if (sub == nbtest) {
            code = with_escalation(
                sc, precision, cap, rep, [&](const LabContext& ctx, Json& r) {
                    const i64 v = has_valuation ? valuation : ctx.data.b_max;
                    return cmd_nbtest(ctx, r, v, eff_trials, eff_seed);
                });
        } else if (sub == rhov) {
            code = with_escalation(
                sc, precision, cap, rep, [&](const LabContext& ctx, Json& r) {
                    return cmd_rhov(ctx, r, valuation);
                });
        } else {
            code = with_escalation(
                sc, precision, cap, rep, [&](const LabContext& ctx, Json& r) {
                    return cmd_verify(ctx, r, suite, eff_trials, eff_seed);
                });
        }
    } catch (const InputError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const ViolationError& e) {
        std::cerr << "violation: " << e.what() << "\n";
        if (rep.is_null()) rep = Json::object();
        rep["verdict"] = "fail";
        rep["violation"] = e.what();
        code = 1;
    } catch (const FieldError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    const auto t1 = std::chrono::steady_clock::now();
    rep["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    try {
        emit(rep, args.out);
    } catch (const InputError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    }
    return code;
}
