// JSON report assembly.  Every verb emits one self-contained document: the
// scenario echo, the parameters the run actually used, the computed
// invariants, the verb payload, and a verdict.  Apart from wall_time_ms the
// document is a deterministic function of scenario + seed + version.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ramlab/suites.hpp"

namespace ramlab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string datum_class_name(DatumClass c) {
    switch (c) {
        case DatumClass::ramified: return "ramified";
        case DatumClass::unramified: return "unramified";
        default: return "trivial";
    }
}

inline Json element_json(const KElement& x) {
    Json j;
    j["digits"] = x.str();
    j["precision"] = x.precision();
    return j;
}

inline Json element_json(const NElement& y) {
    Json j = Json::array();
    for (const auto& c : y.coords()) j.push_back(element_json(c));
    return j;
}

inline Json subgroup_json(const Subgroup& H) {
    Json j;
    j["order"] = H.order();
    Json basis = Json::array();
    for (const auto& g : H.basis()) basis.push_back(g);
    j["basis"] = basis;
    return j;
}

inline Json field_json(const LabContext& ctx) {
    Json j;
    j["characteristic"] =
        ctx.F.characteristic() == Characteristic::zero ? "0" : "p";
    j["p"] = ctx.F.p();
    j["ramification_index"] = ctx.F.ramification_index();
    j["default_precision"] = ctx.precision;
    j["precision_cap"] = ctx.precision_cap;
    return j;
}

inline Json extension_json(const LabContext& ctx) {
    Json j;
    j["degree"] = static_cast<i64>(ctx.N.degree());
    j["layer_count"] = static_cast<i64>(ctx.N.layer_count());
    Json layers = Json::array();
    for (const auto& l : ctx.scenario.layers) {
        Json lj;
        lj["kind"] = l.kind == LayerKind::kummer ? "kummer" : "artin_schreier";
        lj["datum"] = l.datum.to_string();
        layers.push_back(lj);
    }
    j["layers"] = layers;
    return j;
}

inline Json validation_json(const ValidationReport& rep) {
    Json j;
    j["ok"] = rep.ok;
    if (!rep.failure.empty()) j["failure"] = rep.failure;
    Json lines = Json::array();
    for (const auto& l : rep.lines) {
        Json lj;
        lj["line"] = l.line;
        lj["class"] = datum_class_name(l.cls);
        lines.push_back(lj);
    }
    j["character_lines"] = lines;
    return j;
}

inline Json ramification_json(const RamificationData& d, i64 decided_at_precision) {
    Json j;
    j["p"] = d.p;
    j["n"] = static_cast<i64>(d.n);
    j["degree"] = d.degree;
    j["lower_breaks"] = d.lower_breaks;
    j["orders"] = d.order_at_break;
    j["upper_breaks"] = d.upper_breaks;
    j["t_G"] = d.t_G;
    j["b_max"] = d.b_max;
    j["hypothesis_ok"] = d.hypothesis_ok;
    j["decided_at_precision"] = decided_at_precision;
    Json el = Json::array();
    for (std::size_t i = 0; i < d.group.size(); ++i) {
        Json e;
        e["sigma"] = d.group[i];
        e["break"] = d.break_by_index[i];  // -1 marks the identity
        el.push_back(e);
    }
    j["element_breaks"] = el;
    return j;
}

inline Json structural_json(const std::vector<StructuralCheck>& checks) {
    Json arr = Json::array();
    for (const auto& c : checks) {
        Json j;
        j["name"] = c.name;
        j["pass"] = c.pass;
        j["detail"] = c.detail;
        arr.push_back(j);
    }
    return arr;
}

inline Json hypothesis_json(const HypothesisReport& rep) {
    Json j;
    j["ok"] = rep.ok;
    j["failing_upper_breaks"] = rep.failing_upper;
    return j;
}

inline std::string nb_status_name(NbStatus s) { return to_string(s); }

inline Json sweep_json(const SweepReport& rep) {
    Json j;
    j["valuation"] = rep.residue_v;
    j["trials"] = rep.trials;
    j["seed"] = rep.seed;
    j["generator"] = rep.generator;
    j["non_generator"] = rep.non_generator;
    j["inconclusive"] = rep.inconclusive;
    Json det = Json::array();
    for (const auto& t : rep.detail) {
        Json tj;
        tj["index"] = t.index;
        tj["valuation"] = t.valuation;
        tj["status"] = nb_status_name(t.status);
        if (t.det_valuation) tj["det_valuation"] = *t.det_valuation;
        tj["certified_at_precision"] = t.certified_at_precision;
        if (t.status != NbStatus::generator)
            tj["trace_zero_witness"] = t.trace_zero_witness;
        det.push_back(tj);
    }
    j["detail"] = det;
    return j;
}

inline Json certificate_json(const RhoVCertificate& cert) {
    Json j;
    j["v"] = cert.v;
    j["a_v"] = cert.a_v;
    j["k"] = cert.k;
    j["r"] = cert.r;
    j["b_s"] = cert.b_s;
    j["a_v_zero_edge"] = cert.a_v_zero_edge;
    j["H_k"] = subgroup_json(cert.H_k);
    j["H_k1"] = subgroup_json(cert.H_k1);
    j["sigma"] = cert.sigma;
    j["alpha"] = element_json(cert.alpha);
    j["rho_v"] = element_json(cert.rho_v);
    Json c;
    c["valuation_ok"] = cert.checks.valuation_ok;
    c["trace_zero"] = cert.checks.trace_zero;
    c["trace_zero_precision"] = cert.checks.trace_zero_precision;
    c["nb_status"] = nb_status_name(cert.checks.nb_status);
    j["checks"] = c;
    return j;
}

inline Json suite_json(const SuiteResult& res) {
    Json j;
    j["suite"] = res.suite;
    Json checks = Json::array();
    for (const auto& c : res.checks) {
        Json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        if (c.inconclusive) cj["inconclusive"] = true;
        cj["detail"] = c.detail;
        checks.push_back(cj);
    }
    j["checks"] = checks;
    j["passed"] = res.passed();
    j["inconclusive"] = res.inconclusive();
    return j;
}

// Common skeleton; verbs fill in their payload and the verdict afterwards.
inline Json report_skeleton(const std::string& command, const LabContext& ctx,
                            u64 seed, i64 trials) {
    Json j;
    j["tool"] = {{"name", "ramlab"}, {"version", kToolVersion}};
    j["command"] = command;
    j["scenario"] = serialize_scenario(ctx.scenario);
    Json params;
    params["precision"] = ctx.precision;
    params["precision_cap"] = ctx.precision_cap;
    params["seed"] = seed;
    params["trials"] = trials;
    j["parameters"] = params;
    j["field"] = field_json(ctx);
    j["extension"] = extension_json(ctx);
    return j;
}

}  // namespace ramlab
