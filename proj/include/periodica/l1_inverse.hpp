#pragma once

// Certified l1 inversion of integer group-ring elements over Z^d.
//
// Strategy: sample the symbol on a torus grid, invert pointwise, inverse
// FFT for an initial guess, then Newton-Schulz refinement in l1
//      g <- g (2 delta - f g)
// with support truncation at each step. The residual r = ||f g - delta||_1
// (computed with an explicit roundoff bound) certifies convergence; once
// r < 1 the true inverse satisfies ||f^{-1} - g||_1 <= r ||g||_1 / (1 - r),
// which populates the tail of the returned element.

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>
#include <vector>

#include <fftw3.h>
#include <gmpxx.h>

#include "periodica/errors.hpp"
#include "periodica/group_ring.hpp"
#include "periodica/zd_group.hpp"

namespace periodica {

struct InverseCertificate {
    double tol = 0;
    double residual_bound = 0;   // ||f g - delta||_1 + roundoff, stored part
    double tail = 0;             // certified l1 distance to the true inverse
    double norm_f_l1 = 0;
    double stored_norm_g = 0;
    int iterations = 0;
    int grid_size = 0;
    double grid_min_abs_symbol = 0;
    double symbol_lipschitz = 0;
    std::vector<double> residual_history;
};

struct InverseResult {
    L1Element inverse;
    InverseCertificate certificate;
};

// ||f g - delta_e||_1 recomputed exactly: every stored double is a dyadic
// rational, so the sum is an exact rational number. Independent of the
// floating-point path that produced g.
inline mpq_class exact_residual_l1(const GroupRingElement& f,
                                   const L1Element& g) {
    std::unordered_map<GroupElement, mpq_class, GroupElementHash> acc;
    for (const auto& [s, cs] : f.terms())
        for (const auto& [u, cu] : g.terms()) {
            mpq_class term(cu);
            term *= cs;
            acc[s.mul(u)] += term;
        }
    acc[GroupElement::identity(f.dim())] -= 1;
    mpq_class r = 0;
    for (auto& [ge, v] : acc) r += abs(v);
    return r;
}

namespace detail {

inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

struct SymbolGrid {
    std::vector<std::complex<double>> values;  // f evaluated on the grid
    double min_abs = 0;
};

inline SymbolGrid sample_symbol(const GroupRingElement& f, int n) {
    const int d = f.dim();
    size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<size_t>(n);
    std::vector<std::complex<double>> in(total, 0.0), out(total);
    for (const auto& [g, c] : f.terms()) {
        size_t idx = 0;
        for (int i = 0; i < d; ++i)
            idx = idx * static_cast<size_t>(n) +
                  static_cast<size_t>(floor_mod(g[i], n));
        in[idx] += static_cast<double>(c);
    }
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        std::vector<int> dims(static_cast<size_t>(d), n);
        fftw_plan plan = fftw_plan_dft(
            d, dims.data(), reinterpret_cast<fftw_complex*>(in.data()),
            reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
            FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    SymbolGrid sg;
    sg.values = std::move(out);
    sg.min_abs = std::abs(sg.values[0]);
    for (const auto& v : sg.values) sg.min_abs = std::min(sg.min_abs, std::abs(v));
    return sg;
}

inline L1Element initial_guess(const GroupRingElement& f, int n,
                               const SymbolGrid& sg, double floor) {
    const int d = f.dim();
    size_t total = sg.values.size();
    std::vector<std::complex<double>> in(total), out(total);
    for (size_t i = 0; i < total; ++i) in[i] = 1.0 / sg.values[i];
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        std::vector<int> dims(static_cast<size_t>(d), n);
        fftw_plan plan = fftw_plan_dft(
            d, dims.data(), reinterpret_cast<fftw_complex*>(in.data()),
            reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
            FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    L1Element::Terms terms;
    double scale = 1.0 / static_cast<double>(total);
    std::vector<std::int64_t> idx(static_cast<size_t>(d), 0);
    for (size_t flat = 0; flat < total; ++flat) {
        double c = out[flat].real() * scale;
        if (std::abs(c) >= floor) {
            GroupElement g = GroupElement::identity(d);
            // fold residues to representatives in [-n/2, n/2)
            for (int i = 0; i < d; ++i) {
                std::int64_t r = idx[static_cast<size_t>(i)];
                g.coord(i) = r >= n / 2 ? r - n : r;
            }
            terms.push_back({g, c});
        }
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[static_cast<size_t>(i)] < n) break;
            idx[static_cast<size_t>(i)] = 0;
        }
    }
    return L1Element::of(d, std::move(terms), 0.0);
}

inline L1Element truncate_small(const L1Element& g, double floor) {
    L1Element::Terms t;
    for (const auto& [ge, c] : g.terms())
        if (std::abs(c) >= floor) t.push_back({ge, c});
    return L1Element::of(g.dim(), std::move(t), 0.0);
}

}  // namespace detail

// Invertibility is detected, never assumed: a (near-)vanishing symbol on
// the verification grid or a stagnating residual raises not_invertible
// with diagnostics.
inline InverseResult l1_inverse(const GroupRingElement& f, double tol) {
    if (tol <= 0) throw ConfigError("l1_inverse: tol must be positive");
    if (f.is_zero())
        throw DomainError(ErrorCode::not_invertible, "zero element");
    const int d = f.dim();
    const double nf = static_cast<double>(f.norm_l1());

    // Lipschitz constant of the symbol on the torus (per unit of angle).
    double lip = 0;
    std::int64_t max_radius = 0;
    for (const auto& [g, c] : f.terms()) {
        double l1s = 0;
        for (int i = 0; i < d; ++i) l1s += static_cast<double>(std::abs(g[i]));
        lip += std::abs(static_cast<double>(c)) * l1s;
        max_radius = std::max(max_radius, g.word_length());
    }
    lip *= 2.0 * M_PI;

    int n = 64;
    while (n < 8 * (2 * max_radius + 1)) n *= 2;
    double total_cells = std::pow(static_cast<double>(n), d);
    while (total_cells > (1 << 20) && n > 8) {
        n /= 2;
        total_cells = std::pow(static_cast<double>(n), d);
    }

    std::string diagnostics;
    for (int attempt = 0; attempt < 4; ++attempt, n *= 2) {
        if (std::pow(static_cast<double>(n), d) > (1 << 22)) break;
        auto sg = detail::sample_symbol(f, n);
        double spacing = 2.0 * M_PI / n;
        // |f^| at an off-grid zero would still be <= lip * spacing / 2 at the
        // nearest grid point, so this interval bound is vanishing evidence.
        bool may_vanish = sg.min_abs - lip * spacing * 0.5 * std::sqrt(double(d)) <= 0;
        if (sg.min_abs < 1e-9) {
            throw DomainError(
                ErrorCode::not_invertible,
                "symbol vanishes on the verification grid",
                "min |f^| = " + std::to_string(sg.min_abs) + " on grid " +
                    std::to_string(n) + "^" + std::to_string(d) +
                    ", Lipschitz " + std::to_string(lip));
        }

        double floor = tol / (16.0 * std::max(1.0, nf) *
                              std::pow(static_cast<double>(n), d));
        L1Element g = detail::initial_guess(f, n, sg, floor * 0.01);

        InverseCertificate cert;
        cert.tol = tol;
        cert.norm_f_l1 = nf;
        cert.grid_size = n;
        cert.grid_min_abs_symbol = sg.min_abs;
        cert.symbol_lipschitz = lip;

        auto deltae = L1Element::delta(GroupElement::identity(d));
        int no_halve = 0;
        double prev_r = std::numeric_limits<double>::infinity();
        bool stagnated = false;
        for (int it = 0; it < 60; ++it) {
            L1Element fg = convolve(f, g);
            L1Element err = deltae - fg;
            double r = err.stored_norm_l1() + err.tail();
            cert.residual_history.push_back(r);
            cert.iterations = it;
            double ng = g.stored_norm_l1();
            if (r < 1.0) {
                double tail = r * ng / (1.0 - r);
                if (r + tail * nf <= tol * 0.98) {
                    L1Element out = g;
                    out.set_tail(tail);
                    cert.residual_bound = r;
                    cert.tail = tail;
                    cert.stored_norm_g = ng;
                    return {out, cert};
                }
            }
            if (r > prev_r * 0.5) {
                if (++no_halve >= 10) { stagnated = true; break; }
            } else {
                no_halve = 0;
            }
            prev_r = std::min(prev_r, r);
            // g <- g + g (delta - f g)
            g = g + convolve(g, err);
            g = detail::truncate_small(g, floor);
            if (g.terms().size() > 400000) { stagnated = true; break; }
        }
        (void)stagnated;
        diagnostics += "grid " + std::to_string(n) + ": residual stagnated at " +
                       std::to_string(prev_r) +
                       (may_vanish ? " (symbol interval bound admits a zero)"
                                   : "") +
                       "; ";
        // retry on a finer grid
    }
    throw DomainError(ErrorCode::not_invertible,
                      "residual failed to reach tolerance (stagnation)",
                      diagnostics);
}

// Smallest enumeration-prefix window W (containing the identity) such that
// the l1 mass of g outside W^{-1} is below eta.
inline FiniteSubset tail_window(const L1Element& g, double eta,
                                const Enumeration& en) {
    if (eta <= g.tail())
        throw DomainError(ErrorCode::unachievable_tolerance,
                          "tail window target below certification floor",
                          "eta = " + std::to_string(eta) + ", tail = " +
                              std::to_string(g.tail()));
    double total = g.stored_norm_l1() + g.tail();
    if (total < eta) {
        std::vector<GroupElement> one{GroupElement::identity(g.dim())};
        return FiniteSubset::of(g.dim(), std::move(one));
    }
    // grow the prefix until the mass outside W^{-1} drops below eta
    std::int64_t max_r = 1;
    for (const auto& [ge, c] : g.terms())
        max_r = std::max(max_r, ge.word_length());
    size_t cap = en.ball_size(max_r + 1);
    auto prefix = en.prefix(cap);
    double inside = 0;
    std::vector<GroupElement> w;
    for (size_t m = 0; m < prefix.size(); ++m) {
        w.push_back(prefix[m]);
        inside += std::abs(g.coeff(prefix[m].inv()));
        double outside = g.stored_norm_l1() - inside + g.tail();
        if (outside < eta) return FiniteSubset::of(g.dim(), std::move(w));
    }
    throw InternalError("tail_window failed to terminate");
}

// Coefficients of g on W, zero elsewhere; exactly finitely supported.
inline L1Element truncate_inverse(const L1Element& g, const FiniteSubset& w) {
    return g.restricted(w);
}

}  // namespace periodica
