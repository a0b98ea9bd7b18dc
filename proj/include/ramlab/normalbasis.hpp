// Normal basis membership over a totally ramified elementary abelian
// p-extension N/K, the trace valuation law and its converse solver, the
// subfield trace congruence, and the constructive production of trace-zero
// non-generators at every forbidden valuation class.

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "ramlab/linalg.hpp"
#include "ramlab/ramification.hpp"

namespace ramlab {

enum class NbStatus { generator, non_generator, inconclusive };

inline const char* to_string(NbStatus s) {
    switch (s) {
        case NbStatus::generator: return "generator";
        case NbStatus::non_generator: return "non_generator";
        default: return "inconclusive";
    }
}

struct NbVerdict {
    NbStatus status = NbStatus::inconclusive;
    std::optional<i64> det_valuation;  // generator only
    // non_generator / inconclusive: coefficients c_s on the conjugates with
    // sum c_s s(rho) = 0 certified modulo pi_K^certified_at_precision.
    std::vector<KElement> dependence;
    bool trace_zero_witness = false;  // Tr(rho) vanishes to working precision
    i64 certified_at_precision = 0;
};

// Conjugate-coordinate rank test.  A dependence among the conjugates is
// re-verified against the original rows before it is reported; it certifies
// the verdict only modulo a power of the uniformizer, so the threshold
// decides when that counts as non_generator rather than inconclusive.
inline NbVerdict nb_test(const ExtensionField& N, const NElement& rho,
                         std::optional<i64> min_certificate = {}) {
    if (rho.is_zero_to_precision())
        throw InputError("nb_test: element is zero to its precision");
    const i64 threshold = min_certificate
                              ? *min_certificate
                              : std::max<i64>(8, N.ground().default_precision() / 4);

    const auto group = N.full_group().elements();
    std::vector<NElement> conj;
    conj.reserve(group.size());
    std::vector<std::vector<KElement>> rows;
    rows.reserve(group.size());
    for (const auto& s : group) {
        conj.push_back(N.apply_galois(s, rho));
        rows.push_back(conj.back().coords());
    }

    auto elim = eliminate_rows(N.ground(), std::move(rows));
    NbVerdict out;
    if (elim.completed) {
        out.status = NbStatus::generator;
        out.det_valuation = elim.det_valuation;
        return out;
    }

    NElement z = N.zero();
    for (std::size_t i = 0; i < conj.size(); ++i) {
        if (elim.dependence[i].is_structural_zero()) continue;
        z = z + conj[i].scalar_mul(elim.dependence[i]);
    }
    if (!z.is_zero_to_precision())
        throw ViolationError("nb_test: elimination transcript failed re-verification");

    out.dependence = std::move(elim.dependence);
    out.certified_at_precision = z.precision();
    const KElement tr = N.trace_to_ground(rho);
    out.trace_zero_witness = tr.is_zero_to_precision();
    out.status = out.certified_at_precision >= threshold ? NbStatus::non_generator
                                                         : NbStatus::inconclusive;
    return out;
}

struct TraceLawReport {
    i64 v_rho = 0;
    i64 t_G = 0;
    std::optional<i64> v_trace;  // on the v_N scale; absent when the trace
                                 // vanished to working precision
    bool in_class = false;       // v_rho lands in the b_max class mod p^n
    bool law_holds = false;
};

inline TraceLawReport trace_valuation_forward(const ExtensionField& N,
                                              const RamificationData& data,
                                              const NElement& rho) {
    TraceLawReport rep;
    rep.t_G = data.t_G;
    const auto v = N.n_valuation(rho);
    if (!v) throw PrecisionError("trace law: valuation of the sample inconclusive");
    rep.v_rho = *v;
    rep.in_class = (((rep.v_rho - data.b_max) % data.degree) + data.degree) %
                       data.degree ==
                   0;

    const KElement tr = N.trace_to_ground(rho);
    const auto vk = tr.valuation();
    if (vk) rep.v_trace = *vk * data.degree;
    if (rep.in_class) {
        if (!rep.v_trace)
            throw PrecisionError(
                "trace law: trace vanished to precision inside the asserted class");
        rep.law_holds = *rep.v_trace == rep.v_rho + data.t_G;
    } else {
        rep.law_holds = rep.v_trace && *rep.v_trace == rep.v_rho + data.t_G;
    }
    return rep;
}

struct TraceSolveResult {
    NElement rho;
    i64 iterations = 0;
    i64 residual_precision = 0;  // precision at which Tr(rho) matched the target
};

namespace detail {

// Successive approximation for Tr_{N/L} rho = alpha with v_N(rho) = target_v.
// Each round matches the leading residue of the residual with a digit times
// the trace of a uniformizer power; the valuation law for H makes the match
// exact one digit at a time.
inline TraceSolveResult solve_trace_core(const ExtensionField& N, const Subgroup& H,
                                         const SubgroupFiltration& HF,
                                         const NElement& alpha, i64 target_v) {
    const i64 p = N.ground().p();
    const i64 h_order = H.order();

    for (const auto& g : H.basis())
        if (!(N.apply_galois(g, alpha) - alpha).is_zero_to_precision())
            throw InputError("solve_trace: right-hand side is not fixed by the subgroup");

    const auto va = N.n_valuation(alpha);
    if (!va)
        throw InputError(
            "solve_trace: right-hand side is zero to precision, the valuation "
            "precondition cannot hold");

    if (h_order == 1) {
        if (*va != target_v)
            throw InputError("solve_trace: trivial subgroup needs v(alpha) = target");
        return {alpha, 0, alpha.precision()};
    }

    if ((((target_v - HF.b_max) % h_order) + h_order) % h_order != 0)
        throw InputError("solve_trace: target valuation " + std::to_string(target_v) +
                         " is not congruent to the largest break " +
                         std::to_string(HF.b_max) + " mod " + std::to_string(h_order));
    if (*va != target_v + HF.t_sum)
        throw InputError("solve_trace: v(alpha) = " + std::to_string(*va) +
                         ", expected target + t_H = " +
                         std::to_string(target_v + HF.t_sum));

    TraceSolveResult res{N.zero(), 0, 0};
    NElement beta = alpha;
    const i64 max_iter =
        static_cast<i64>(N.degree()) * (N.ground().default_precision() + 64);
    while (!beta.is_zero_to_precision()) {
        if (++res.iterations > max_iter)
            throw PrecisionError("solve_trace: no convergence within the precision window");
        const auto vb = N.n_valuation(beta);
        if (!vb) throw PrecisionError("solve_trace: residual valuation inconclusive");
        const i64 w = *vb - HF.t_sum;

        const NElement piw = N.uniformizer_power(w);
        const NElement tw = N.trace_to(H, piw);
        const auto vt = N.n_valuation(tw);
        if (!vt || *vt != *vb)
            throw ViolationError("solve_trace: trace of candidate at valuation " +
                                 std::to_string(w) + " violated the valuation law");
        const i64 dt = N.leading_residue(tw, *vb);
        const i64 db = N.leading_residue(beta, *vb);
        const i64 d = db * Subgroup::mod_inv(dt, p) % p;

        res.rho = res.rho + piw.small_mul(d);
        beta = beta - tw.small_mul(d);
        const auto vn = N.n_valuation(beta);
        if (vn && *vn <= *vb)
            throw ViolationError("solve_trace: residual valuation failed to increase");
    }
    res.residual_precision = beta.precision();

    const auto vr = N.n_valuation(res.rho);
    if (!vr || *vr != target_v)
        throw ViolationError("solve_trace: solution valuation check failed");
    return res;
}

}  // namespace detail

// Tr_{N/K} rho = alpha.
inline TraceSolveResult solve_trace(const ExtensionField& N,
                                    const RamificationData& data,
                                    const KElement& alpha, i64 target_v) {
    SubgroupFiltration full;
    full.lower_breaks = data.lower_breaks;
    full.orders = data.order_at_break;
    full.t_sum = data.t_G;
    full.b_max = data.b_max;
    return detail::solve_trace_core(N, N.full_group(), full, N.embed_ground(alpha),
                                    target_v);
}

// Tr_{N/L} rho = alpha for an intermediate field L given by its subgroup.
inline TraceSolveResult solve_trace(const ExtensionField& N,
                                    const RamificationData& data,
                                    const IntermediateField& L,
                                    const NElement& alpha_in_L, i64 target_v) {
    return detail::solve_trace_core(N, L.subgroup(),
                                    induced_filtration(data, L.subgroup()),
                                    L.embed(alpha_in_L), target_v);
}

struct SubfieldTraceReport {
    i64 b = 0;  // the single break of L/K
    i64 v_N_trace = 0;
    i64 v_L_trace = 0;
    bool congruence_holds = false;  // v_L(Tr) = b mod p
};

// For an index-p subgroup H and rho in the allowed class, the valuation of
// Tr_{N/L} rho over L = N^H lands in the residue class of the break of L/K.
inline SubfieldTraceReport subfield_trace_congruence(const ExtensionField& N,
                                                     const RamificationData& data,
                                                     const Subgroup& H,
                                                     const NElement& rho) {
    if (data.n < 2)
        throw InputError("subfield trace congruence needs a noncyclic group");
    if (H.rank() + 1 != data.n)
        throw InputError("subfield trace congruence needs an index-p subgroup");
    const auto v = N.n_valuation(rho);
    if (!v) throw PrecisionError("subfield trace: sample valuation inconclusive");
    if ((((*v - data.b_max) % data.degree) + data.degree) % data.degree != 0)
        throw InputError("subfield trace: sample valuation " + std::to_string(*v) +
                         " is outside the allowed class of " +
                         std::to_string(data.b_max) + " mod " +
                         std::to_string(data.degree));

    SubfieldTraceReport rep;
    // b = largest upper break whose filtration subgroup is not inside H
    for (std::size_t i = 0; i < data.m; ++i) {
        bool outside = false;
        for (const auto& s : data.group) {
            const std::size_t idx = data.encode(s);
            if (data.break_by_index[idx] >= data.lower_breaks[i] && !H.contains(s))
                outside = true;
        }
        if (outside) rep.b = data.upper_breaks[i];
    }

    const NElement tr = N.trace_to(H, rho);
    const auto vt = N.n_valuation(tr);
    if (!vt) throw PrecisionError("subfield trace: trace valuation inconclusive");
    rep.v_N_trace = *vt;
    const i64 h_order = H.order();
    if (((*vt % h_order) + h_order) % h_order != 0)
        throw ViolationError("subfield trace: trace valuation not divisible by |H|");
    rep.v_L_trace = *vt / h_order;
    rep.congruence_holds =
        (((rep.v_L_trace - rep.b) % data.p) + data.p) % data.p == 0;
    return rep;
}

struct RhoVChecks {
    bool valuation_ok = false;
    bool trace_zero = false;
    i64 trace_zero_precision = 0;
    NbStatus nb_status = NbStatus::inconclusive;
};

struct RhoVCertificate {
    i64 v = 0;
    i64 a_v = 0;
    i64 k = 0;
    i64 r = 0;
    i64 b_s = 0;
    bool a_v_zero_edge = false;  // v = 0 mod p^n forces r = p-1
    Subgroup H_k;
    Subgroup H_k1;
    GaloisVector sigma;
    NElement alpha;  // embedded in N
    NElement rho_v;
    RhoVChecks checks;
};

struct RhoVOptions {
    bool randomize_alpha = false;
    u64 seed = 0;
};

// Constructive trace-zero non-generator at valuation v, following the
// second-statement proof step by step: express the class of v as a multiple
// a_v of the largest break, split off the p-part of a_v - 1, pick the break
// b_s whose group order brackets p^{k+1}, pin nested subgroups H_k inside
// H_{k+1} between the filtration steps, push a uniformizer power of the
// fixed field of H_k through (sigma - 1)^r, and solve the trace equation
// back down to valuation v.
inline RhoVCertificate construct_rho_v(const ExtensionField& N,
                                       const RamificationData& data, i64 v,
                                       RhoVOptions opts = {}) {
    const i64 p = data.p;
    const i64 pn = data.degree;
    if (!data.hypothesis_ok) {
        std::string us;
        for (i64 u : check_hypothesis(data).failing_upper)
            us += (us.empty() ? "" : ", ") + std::to_string(u);
        throw InputError("construct_rho_v: upper breaks (" + us +
                         ") are divisible by p, the construction needs them coprime");
    }

    RhoVCertificate cert;
    cert.v = v;
    cert.a_v = ((v % pn) + pn) % pn * Subgroup::mod_inv(((data.b_max % pn) + pn) % pn, pn) % pn;
    if (cert.a_v == 1)
        throw InputError("construct_rho_v: valuation " + std::to_string(v) +
                         " lies in the normal-basis class " +
                         std::to_string(data.b_max) + " mod " + std::to_string(pn));
    cert.a_v_zero_edge = cert.a_v == 0;

    i64 rest = cert.a_v - 1;  // nonzero; negative exactly in the a_v = 0 edge
    cert.k = 0;
    while (rest % p == 0) {
        rest /= p;
        ++cert.k;
    }
    cert.r = ((rest % p) + p) % p;

    i64 pk = 1;
    for (i64 i = 0; i < cert.k; ++i) pk *= p;
    const i64 pk1 = pk * p;

    std::size_t s_idx = data.m;  // 1-based index of b_s in the break list
    for (std::size_t i = 0; i < data.m; ++i)
        if (data.order_at_break[i] >= pk1) s_idx = i + 1;
    if (s_idx == data.m && data.order_at_break.back() < pk1)
        throw ViolationError("construct_rho_v: no break order brackets p^(k+1)");
    cert.b_s = data.lower_breaks[s_idx - 1];
    const i64 g_next = s_idx < data.m ? data.order_at_break[s_idx] : 1;
    if (g_next >= pk1)
        throw ViolationError("construct_rho_v: break order bracketing failed");

    // echelon-deterministic subgroup chain: start from the filtration step
    // after b_s and extend greedily through G_{b_s} in enumeration order
    std::vector<GaloisVector> chain;
    for (const auto& g : data.group) {
        const i64 br = data.break_by_index[data.encode(g)];
        if (br > cert.b_s) chain.push_back(g);
    }
    Subgroup cur = Subgroup::from_generators(p, data.n, chain);
    if (static_cast<i64>(cur.rank()) > cert.k)
        throw ViolationError("construct_rho_v: tail subgroup too large for H_k");
    for (const auto& g : data.group) {
        if (static_cast<i64>(cur.rank()) >= cert.k + 1) break;
        const i64 br = data.break_by_index[data.encode(g)];
        if (br < cert.b_s || cur.contains(g)) continue;
        if (static_cast<i64>(cur.rank()) == cert.k) {
            cert.H_k = cur;
            cert.sigma = g;
        }
        chain.push_back(g);
        cur = Subgroup::from_generators(p, data.n, chain);
    }
    if (static_cast<i64>(cur.rank()) != cert.k + 1)
        throw ViolationError("construct_rho_v: subgroup chain construction failed");
    cert.H_k1 = cur;

    const i64 t_Hk = t_sum(data, cert.H_k);
    const i64 e_num = v + t_Hk - cert.r * pk * cert.b_s;
    if (e_num % pk != 0)
        throw ViolationError("construct_rho_v: fixed-field exponent " +
                             std::to_string(e_num) + " is not divisible by p^k");
    const i64 e_L = e_num / pk;

    SplitMix64 rng(opts.seed);
    if (cert.k == 0) {
        cert.alpha = N.uniformizer_power(e_L);
        if (opts.randomize_alpha) cert.alpha = cert.alpha * N.random_unit(rng);
        NElement beta = cert.alpha;
        for (i64 i = 0; i < cert.r; ++i)
            beta = N.apply_galois(cert.sigma, beta) - beta;
        const auto vb = N.n_valuation(beta);
        if (!vb || *vb != v + t_Hk)
            throw ViolationError("construct_rho_v: twisted witness valuation check failed");
        cert.rho_v = beta;
    } else {
        const IntermediateField L = fixed_field(N, cert.H_k);
        const ExtensionField& LF = L.field();
        NElement alpha_L = LF.uniformizer_power(e_L);
        if (opts.randomize_alpha) alpha_L = alpha_L * LF.random_unit(rng);
        const GaloisVector sigma_L = L.induced_action(cert.sigma);
        NElement beta_L = alpha_L;
        for (i64 i = 0; i < cert.r; ++i)
            beta_L = LF.apply_galois(sigma_L, beta_L) - beta_L;
        const auto vbl = LF.n_valuation(beta_L);
        if (!vbl || *vbl * pk != v + t_Hk)
            throw ViolationError("construct_rho_v: twisted witness valuation check failed");
        cert.alpha = L.embed(alpha_L);
        cert.rho_v = solve_trace(N, data, L, beta_L, v).rho;
    }

    const auto vr = N.n_valuation(cert.rho_v);
    cert.checks.valuation_ok = vr && *vr == v;
    const KElement tr = N.trace_to_ground(cert.rho_v);
    cert.checks.trace_zero = tr.is_zero_to_precision();
    cert.checks.trace_zero_precision = tr.precision();
    if (!cert.checks.valuation_ok || !cert.checks.trace_zero)
        throw ViolationError("construct_rho_v: certificate checks failed");

    const NbVerdict nb = nb_test(N, cert.rho_v);
    cert.checks.nb_status = nb.status;
    if (nb.status == NbStatus::generator)
        throw ViolationError(
            "construct_rho_v: trace-zero witness tested as a generator");
    if (nb.status == NbStatus::inconclusive)
        throw PrecisionError(
            "construct_rho_v: membership test inconclusive at this precision");
    return cert;
}

struct SweepTrial {
    i64 index = 0;
    i64 valuation = 0;
    NbStatus status = NbStatus::inconclusive;
    std::optional<i64> det_valuation;
    i64 certified_at_precision = 0;
    bool trace_zero_witness = false;
};

struct SweepReport {
    i64 residue_v = 0;
    i64 trials = 0;
    u64 seed = 0;
    i64 generator = 0;
    i64 non_generator = 0;
    i64 inconclusive = 0;
    std::vector<SweepTrial> detail;
};

// Random elements at a fixed valuation, tested independently.  Per-trial
// seeds are derived from the master seed and the trial index, so the tally
// does not depend on execution order.
inline SweepReport sweep_class(const ExtensionField& N, i64 residue_v, i64 trials,
                               u64 seed) {
    SweepReport rep;
    rep.residue_v = residue_v;
    rep.trials = trials;
    rep.seed = seed;
    for (i64 i = 0; i < trials; ++i) {
        SplitMix64 rng(SplitMix64::derive(seed, static_cast<u64>(i)));
        const NElement rho = N.random_with_valuation(residue_v, rng);
        const NbVerdict verdict = nb_test(N, rho);
        SweepTrial t;
        t.index = i;
        t.valuation = residue_v;
        t.status = verdict.status;
        t.det_valuation = verdict.det_valuation;
        t.certified_at_precision = verdict.certified_at_precision;
        t.trace_zero_witness = verdict.trace_zero_witness;
        rep.detail.push_back(t);
        switch (verdict.status) {
            case NbStatus::generator: ++rep.generator; break;
            case NbStatus::non_generator: ++rep.non_generator; break;
            default: ++rep.inconclusive; break;
        }
    }
    return rep;
}

}  // namespace ramlab
