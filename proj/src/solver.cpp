#include "aharm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace aharm {

namespace {

// clamp the regularized gradient argument into the model's open domain
double safe_s(const DiffusivityModel& m, double s, double eps) {
    double v = std::sqrt(s * s + eps * eps);
    double cap = m.s_max() * (1.0 - 1e-9);
    if (v > cap) v = cap;
    if (v < 1e-300) v = 1e-300;
    return v;
}

// nodal coefficient field a(|grad u|_eps) for the frozen-coefficient sweep;
// beta_eff reports the largest realized 1 + D, which bounds the Picard
// amplification and steers the damping
ScalarField coefficient_field(const AnnulusChart& chart, const DiffusivityModel& m,
                              const ScalarField& u, double eps, bool* clamped,
                              double* beta_eff = nullptr) {
    ScalarField W = grad_norm_g(chart, u);
    ScalarField kappa(chart.n_sigma, chart.n_theta);
    double cap = m.s_max() * (1.0 - 1e-9);
    double beta = 1.0;
    for (int i = 0; i < chart.n_sigma; ++i)
        for (int j = 0; j < chart.n_theta; ++j) {
            double raw = std::sqrt(W(i, j) * W(i, j) + eps * eps);
            if (raw > cap && clamped) *clamped = true;
            double s = safe_s(m, W(i, j), eps);
            kappa(i, j) = m.a(s);
            if (beta_eff && raw <= cap)
                beta = std::max(beta, 1.0 + m.a_prime(s) * s / kappa(i, j));
        }
    if (beta_eff) *beta_eff = beta;
    return kappa;
}

// y = A u on interior rows for the five-point operator with face-averaged
// kappa; Dirichlet rows are passed through untouched (callers mask them).
struct FivePoint {
    const AnnulusChart& chart;
    const ScalarField& kappa;

    double face_s(int i, int j) const {  // face between rows i and i+1
        return 0.5 * (kappa(i, j) + kappa(i + 1, j));
    }
    double face_t(int i, int j) const {  // face between columns j and j+1
        int jp = (j + 1) % chart.n_theta;
        return 0.5 * (kappa(i, j) + kappa(i, jp));
    }

    // negative divergence form: positive definite
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        int ns = chart.n_sigma, nt = chart.n_theta;
        double i_hs2 = 1.0 / (chart.h_sigma * chart.h_sigma);
        double i_ht2 = 1.0 / (chart.h_theta * chart.h_theta);
        auto at = [&](int i, int j) { return x[static_cast<size_t>(i - 1) * nt + j]; };
        for (int i = 1; i < ns - 1; ++i) {
            for (int j = 0; j < nt; ++j) {
                int jp = (j + 1) % nt, jm = (j + nt - 1) % nt;
                double up = (i + 1 <= ns - 2) ? at(i + 1, j) : 0.0;
                double dn = (i - 1 >= 1) ? at(i - 1, j) : 0.0;
                double ks_up = face_s(i, j), ks_dn = face_s(i - 1, j);
                double kt_r = face_t(i, j), kt_l = face_t(i, jm);
                double v = (ks_up * (at(i, j) - up) + ks_dn * (at(i, j) - dn)) * i_hs2 +
                           (kt_r * (at(i, j) - at(i, jp)) + kt_l * (at(i, j) - at(i, jm))) * i_ht2;
                y[static_cast<size_t>(i - 1) * nt + j] = v;
            }
        }
    }

    void diagonal(std::vector<double>& d) const {
        int ns = chart.n_sigma, nt = chart.n_theta;
        double i_hs2 = 1.0 / (chart.h_sigma * chart.h_sigma);
        double i_ht2 = 1.0 / (chart.h_theta * chart.h_theta);
        for (int i = 1; i < ns - 1; ++i)
            for (int j = 0; j < nt; ++j) {
                int jm = (j + nt - 1) % nt;
                d[static_cast<size_t>(i - 1) * nt + j] =
                    (face_s(i, j) + face_s(i - 1, j)) * i_hs2 +
                    (face_t(i, j) + face_t(i, jm)) * i_ht2;
            }
    }

    // boundary data contributions to the right-hand side
    void boundary_rhs(double t1, double t2, std::vector<double>& b) const {
        int ns = chart.n_sigma, nt = chart.n_theta;
        double i_hs2 = 1.0 / (chart.h_sigma * chart.h_sigma);
        std::fill(b.begin(), b.end(), 0.0);
        for (int j = 0; j < nt; ++j) {
            b[j] += face_s(0, j) * t1 * i_hs2;
            b[static_cast<size_t>(ns - 3) * nt + j] += face_s(ns - 2, j) * t2 * i_hs2;
        }
    }
};

// Jacobi-preconditioned conjugate gradients; deterministic.
int pcg(const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
        const std::vector<double>& diag, const std::vector<double>& b,
        std::vector<double>& x, double rel_tol, int max_iter) {
    size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), Ap(n);
    apply(x, Ap);
    double bnorm = 0.0;
    for (size_t k = 0; k < n; ++k) {
        r[k] = b[k] - Ap[k];
        bnorm += b[k] * b[k];
    }
    bnorm = std::sqrt(bnorm);
    double target = rel_tol * std::max(bnorm, 1e-300);
    double rz = 0.0;
    for (size_t k = 0; k < n; ++k) {
        z[k] = r[k] / diag[k];
        rz += r[k] * z[k];
    }
    p = z;
    int it = 0;
    for (; it < max_iter; ++it) {
        double rnorm = 0.0;
        for (size_t k = 0; k < n; ++k) rnorm += r[k] * r[k];
        if (std::sqrt(rnorm) <= target) break;
        apply(p, Ap);
        double pAp = 0.0;
        for (size_t k = 0; k < n; ++k) pAp += p[k] * Ap[k];
        if (pAp <= 0.0) break;  // lost positivity; bail with current iterate
        double alpha = rz / pAp;
        for (size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * Ap[k];
        }
        double rz_new = 0.0;
        for (size_t k = 0; k < n; ++k) {
            z[k] = r[k] / diag[k];
            rz_new += r[k] * z[k];
        }
        double beta = rz_new / rz;
        rz = rz_new;
        for (size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    return it;
}

// scaled residual of the nonlinear five-point equation: Jacobi-scaled max
// norm in solution units, divided by (t2 - t1)
double scaled_residual(const AnnulusChart& chart, const ScalarField& kappa,
                       const ScalarField& u, double t_span) {
    int ns = chart.n_sigma, nt = chart.n_theta;
    FivePoint op{chart, kappa};
    double i_hs2 = 1.0 / (chart.h_sigma * chart.h_sigma);
    double i_ht2 = 1.0 / (chart.h_theta * chart.h_theta);
    double worst = 0.0;
    for (int i = 1; i < ns - 1; ++i)
        for (int j = 0; j < nt; ++j) {
            int jp = (j + 1) % nt, jm = (j + nt - 1) % nt;
            double ks_up = op.face_s(i, j), ks_dn = op.face_s(i - 1, j);
            double kt_r = op.face_t(i, j), kt_l = op.face_t(i, jm);
            double r = (ks_up * (u(i, j) - u(i + 1, j)) + ks_dn * (u(i, j) - u(i - 1, j))) * i_hs2 +
                       (kt_r * (u(i, j) - u(i, jp)) + kt_l * (u(i, j) - u(i, jm))) * i_ht2;
            double diag = (ks_up + ks_dn) * i_hs2 + (kt_r + kt_l) * i_ht2;
            worst = std::max(worst, std::abs(r) / diag);
        }
    return worst / t_span;
}

// --- Newton scheme: P1 assembly on the triangulated grid -------------------
//
// Each cell splits along its main diagonal; gradients are constant per
// triangle and the linearized flux tensor  a(s) I + (a'(s)/(mu q)) g g^T
// (g the chart gradient, s = q/mu regularized) is evaluated per triangle.

struct TriangleAssembler {
    const AnnulusChart& chart;
    const DiffusivityModel& model;
    const ScalarField& u;
    double eps;

    template <typename Visit>
    void for_each_triangle(Visit&& visit) const {
        int ns = chart.n_sigma, nt = chart.n_theta;
        double hs = chart.h_sigma, ht = chart.h_theta;
        for (int i = 0; i < ns - 1; ++i)
            for (int j = 0; j < nt; ++j) {
                int jp = (j + 1) % nt;
                // two triangles per cell, vertices as (i, j) pairs
                int tri[2][3][2] = {{{i, j}, {i + 1, j}, {i + 1, jp}},
                                    {{i, j}, {i + 1, jp}, {i, jp}}};
                // P1 gradients of the hat functions on each triangle
                double grads[2][3][2] = {
                    {{-1.0 / hs, 0.0}, {1.0 / hs, -1.0 / ht}, {0.0, 1.0 / ht}},
                    {{-1.0 / hs, 1.0 / ht}, {1.0 / hs, 0.0}, {0.0, -1.0 / ht}}};
                double area = 0.5 * hs * ht;
                for (int t = 0; t < 2; ++t) visit(tri[t], grads[t], area);
            }
    }

    // tensor coefficient at the triangle, from the nodal values of w
    void tensor(const int tri[3][2], const double grads[3][2], const ScalarField& w,
                double A[3]) const {
        double g0 = 0.0, g1 = 0.0, mu = 0.0;
        for (int v = 0; v < 3; ++v) {
            double val = w(tri[v][0], tri[v][1]);
            g0 += grads[v][0] * val;
            g1 += grads[v][1] * val;
            mu += chart.mu(tri[v][0], tri[v][1]) / 3.0;
        }
        double q = std::hypot(g0, g1);
        double s = safe_s(model, q / mu, eps);
        double a = model.a(s);
        double ap = model.a_prime(s);
        double scale = (q > 1e-14) ? ap / (mu * std::sqrt(q * q + (eps * mu) * (eps * mu))) : 0.0;
        A[0] = a + scale * g0 * g0;  // A11
        A[1] = scale * g0 * g1;      // A12 = A21
        A[2] = a + scale * g1 * g1;  // A22
    }
};

}  // namespace

Solution solve_dirichlet(std::shared_ptr<const AnnulusChart> chart_ptr,
                         const DiffusivityModel& model, double t1, double t2,
                         const SolverOptions& opts) {
    if (!chart_ptr) throw domain_error("solve_dirichlet: null chart");
    const AnnulusChart& chart = *chart_ptr;
    if (!(t1 < t2)) throw domain_error("solve_dirichlet requires t1 < t2");

    int ns = chart.n_sigma, nt = chart.n_theta;
    double lnR = std::log(chart.R);
    double span = t2 - t1;
    double eps0 = opts.epsilon0 > 0.0 ? opts.epsilon0 : 1e-3 * span / lnR;
    double eps_floor = eps0 / 100.0;

    Solution sol{chart_ptr, model};
    sol.t1 = t1;
    sol.t2 = t2;
    sol.u = ScalarField(ns, nt);
    for (int i = 0; i < ns; ++i) {
        double v = t1 + span * chart.sigma(i) / lnR;
        for (int j = 0; j < nt; ++j) sol.u(i, j) = v;
    }

    size_t n_int = static_cast<size_t>(ns - 2) * nt;
    std::vector<double> x(n_int), b(n_int), diag(n_int);
    for (int i = 1; i < ns - 1; ++i)
        for (int j = 0; j < nt; ++j)
            x[static_cast<size_t>(i - 1) * nt + j] = sol.u(i, j);

    double eps = eps0;
    double rel_update = 1e300;
    bool clamped_last = false;
    int it = 1;
    for (; it <= opts.max_iter; ++it) {
        if (it % 20 == 0) eps = std::max(eps * 0.5, eps_floor);

        clamped_last = false;
        double beta_eff = 1.0;
        ScalarField kappa = coefficient_field(chart, model, sol.u, eps, &clamped_last, &beta_eff);
        // the frozen-coefficient map amplifies errors by up to beta_eff - 1 +
        // ... ~ beta_eff; keep the damped eigenvalue inside the unit disk
        double damping = std::min(0.7, 1.2 / beta_eff);

        if (opts.scheme == Scheme::picard) {
            FivePoint op{chart, kappa};
            op.boundary_rhs(t1, t2, b);
            op.diagonal(diag);
            pcg([&](const std::vector<double>& in, std::vector<double>& out) { op.apply(in, out); },
                diag, b, x, opts.cg_tol, opts.cg_max_iter);

            rel_update = 0.0;
            for (int i = 1; i < ns - 1; ++i)
                for (int j = 0; j < nt; ++j) {
                    double& cur = sol.u(i, j);
                    double next = (1.0 - damping) * cur + damping * x[static_cast<size_t>(i - 1) * nt + j];
                    rel_update = std::max(rel_update, std::abs(next - cur));
                    cur = next;
                }
            for (int i = 1; i < ns - 1; ++i)
                for (int j = 0; j < nt; ++j)
                    x[static_cast<size_t>(i - 1) * nt + j] = sol.u(i, j);
            rel_update /= span;
        } else {
            // Newton: solve the gradient linearization for the update
            damping = 0.7;
            TriangleAssembler asmbl{chart, model, sol.u, eps};
            std::vector<double> rhs(n_int, 0.0), dg(n_int, 0.0);
            // residual of the nonlinear weak form and Jacobi diagonal
            asmbl.for_each_triangle([&](const int tri[3][2], const double grads[3][2], double area) {
                double g0 = 0.0, g1 = 0.0, mu = 0.0;
                for (int v = 0; v < 3; ++v) {
                    double val = sol.u(tri[v][0], tri[v][1]);
                    g0 += grads[v][0] * val;
                    g1 += grads[v][1] * val;
                    mu += chart.mu(tri[v][0], tri[v][1]) / 3.0;
                }
                double q = std::hypot(g0, g1);
                double a = model.a(safe_s(model, q / mu, eps));
                double A[3];
                asmbl.tensor(tri, grads, sol.u, A);
                for (int v = 0; v < 3; ++v) {
                    int i = tri[v][0], j = tri[v][1];
                    if (i == 0 || i == ns - 1) continue;
                    size_t idx = static_cast<size_t>(i - 1) * nt + j;
                    rhs[idx] -= a * (g0 * grads[v][0] + g1 * grads[v][1]) * area;
                    double Ag0 = A[0] * grads[v][0] + A[1] * grads[v][1];
                    double Ag1 = A[1] * grads[v][0] + A[2] * grads[v][1];
                    dg[idx] += (Ag0 * grads[v][0] + Ag1 * grads[v][1]) * area;
                }
            });
            std::vector<double> delta(n_int, 0.0);
            auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
                std::fill(out.begin(), out.end(), 0.0);
                asmbl.for_each_triangle([&](const int tri[3][2], const double grads[3][2], double area) {
                    double g0 = 0.0, g1 = 0.0;
                    for (int v = 0; v < 3; ++v) {
                        int i = tri[v][0], j = tri[v][1];
                        double val = (i == 0 || i == ns - 1)
                                         ? 0.0
                                         : in[static_cast<size_t>(i - 1) * nt + j];
                        g0 += grads[v][0] * val;
                        g1 += grads[v][1] * val;
                    }
                    double A[3];
                    asmbl.tensor(tri, grads, sol.u, A);
                    double f0 = A[0] * g0 + A[1] * g1;
                    double f1 = A[1] * g0 + A[2] * g1;
                    for (int v = 0; v < 3; ++v) {
                        int i = tri[v][0], j = tri[v][1];
                        if (i == 0 || i == ns - 1) continue;
                        out[static_cast<size_t>(i - 1) * nt + j] +=
                            (f0 * grads[v][0] + f1 * grads[v][1]) * area;
                    }
                });
            };
            pcg(apply, dg, rhs, delta, opts.cg_tol, opts.cg_max_iter);
            rel_update = 0.0;
            for (int i = 1; i < ns - 1; ++i)
                for (int j = 0; j < nt; ++j) {
                    double d = damping * delta[static_cast<size_t>(i - 1) * nt + j];
                    sol.u(i, j) += d;
                    rel_update = std::max(rel_update, std::abs(d));
                }
            rel_update /= span;
        }

        if (eps <= eps_floor * (1.0 + 1e-12) && rel_update < opts.tol) {
            ScalarField kf = coefficient_field(chart, model, sol.u, eps, nullptr);
            double res = scaled_residual(chart, kf, sol.u, span);
            if (res < opts.tol || opts.scheme == Scheme::newton) {
                sol.residual = res;
                sol.converged = true;
                break;
            }
        }
    }
    sol.iterations = std::min(it, opts.max_iter);
    sol.epsilon = eps;

    if (!sol.converged) {
        ScalarField kf = coefficient_field(chart, model, sol.u, eps, nullptr);
        std::ostringstream os;
        os << "solver did not converge: iterations=" << sol.iterations
           << " rel_update=" << rel_update
           << " residual=" << scaled_residual(chart, kf, sol.u, span)
           << " epsilon=" << eps;
        throw solver_error(os.str());
    }

    if (clamped_last) {
        ScalarField W = grad_norm_g(chart, sol.u);
        double mx = 0.0;
        for (double v : W.values()) mx = std::max(mx, v);
        if (mx >= model.s_max()) {
            std::ostringstream os;
            os << "structure violation: converged gradient " << mx
               << " leaves the admissible range (s_max = " << model.s_max() << ")";
            throw structure_error(os.str());
        }
    }
    return sol;
}

// --- radial oracle ----------------------------------------------------------

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// supremum of F(t) = a(t) t, finite for bounded-range fluxes
double flux_sup(const DiffusivityModel& m) {
    if (std::isfinite(m.s_max())) return flux_map(m, m.s_max() * (1.0 - 1e-9));
    double f1 = m.a(1e9) * 1e9;
    double f2 = m.a(4e9) * 4e9;
    if (f2 < f1 * (1.0 + 1e-6)) return f2;
    return std::numeric_limits<double>::infinity();
}

}  // namespace

RadialSolution::RadialSolution(DiffusivityModel model, double r_in, double r_out,
                               double t1, double t2)
    : model_(std::move(model)), r_in_(r_in), r_out_(r_out), t1_(t1), t2_(t2), c_(0.0) {
    if (!(r_in > 0.0) || !(r_out > r_in)) throw oracle_error("radial oracle: bad radii");
    if (!(t1 < t2)) throw oracle_error("radial oracle requires t1 < t2");

    double span = t2 - t1;
    auto height = [&](double c) {
        return integrate([&](double r) { return invert_flux(model_, c / r); }, r_in_, r_out_,
                         1e-12);
    };
    // The largest admissible flux constant: c / r_in must stay inside the
    // range of F.  Bounded-range fluxes (minimal surface, subsonic) cap the
    // attainable boundary span; probe the cap once before bracketing.
    double c_cap = flux_sup(model_) * r_in_;
    double c_probe = std::isfinite(c_cap) ? c_cap * (1.0 - 1e-8)
                                          : std::numeric_limits<double>::infinity();
    if (std::isfinite(c_probe) && height(c_probe) < span)
        throw oracle_error("radial oracle: boundary data outside the attainable range");
    double c_lo = 0.0, c_hi = std::isfinite(c_probe) ? std::min(1.0, 0.5 * c_probe) : 1.0;
    int guard = 0;
    while (height(c_hi) < span) {
        c_lo = c_hi;
        c_hi = std::isfinite(c_probe) ? 0.5 * (c_hi + c_probe) : 2.0 * c_hi;
        if (++guard > 300)
            throw oracle_error("radial oracle: boundary data outside the attainable range");
    }
    for (int k = 0; k < 200; ++k) {
        double mid = 0.5 * (c_lo + c_hi);
        if (height(mid) < span) c_lo = mid; else c_hi = mid;
        if (c_hi - c_lo <= 1e-13 * c_hi) break;
    }
    c_ = 0.5 * (c_lo + c_hi);
}

double RadialSolution::uprime_of_r(double r) const { return invert_flux(model_, c_ / r); }

double RadialSolution::u_of_r(double r) const {
    if (r < r_in_ * (1.0 - 1e-12) || r > r_out_ * (1.0 + 1e-12))
        throw oracle_error("radial oracle: r outside [r_in, r_out]");
    r = std::clamp(r, r_in_, r_out_);
    if (r == r_in_) return t1_;
    return t1_ + integrate([&](double rr) { return uprime_of_r(rr); }, r_in_, r, 1e-11);
}

double RadialSolution::r_of_t(double t) const {
    if (t < t1_ - 1e-12 || t > t2_ + 1e-12)
        throw oracle_error("radial oracle: t outside [t1, t2]");
    double lo = r_in_, hi = r_out_;
    for (int k = 0; k < 200; ++k) {
        double mid = 0.5 * (lo + hi);
        if (u_of_r(mid) < t) lo = mid; else hi = mid;
        if (hi - lo <= 1e-13 * hi) break;
    }
    return 0.5 * (lo + hi);
}

RadialSolution radial_oracle(const DiffusivityModel& model, double R, double t1, double t2) {
    return RadialSolution(model, 1.0, R, t1, t2);
}

RadialSolution radial_oracle(const DiffusivityModel& model, double r_in, double r_out,
                             double t1, double t2) {
    return RadialSolution(model, r_in, r_out, t1, t2);
}

Solution inject_radial(std::shared_ptr<const AnnulusChart> chart_ptr,
                       const RadialSolution& radial) {
    if (!chart_ptr) throw domain_error("inject_radial: null chart");
    const AnnulusChart& chart = *chart_ptr;
    if (chart.topology != Topology::annulus_in_disk)
        throw oracle_error("inject_radial needs an annulus_in_disk chart");
    auto kind = chart.lambda_spec.kind;
    if (kind != LambdaSpec::Kind::flat && kind != LambdaSpec::Kind::constant)
        throw oracle_error("inject_radial needs a flat metric");
    double scale = (kind == LambdaSpec::Kind::constant) ? chart.lambda_spec.value : 1.0;

    Solution sol{chart_ptr, radial.model()};
    sol.t1 = radial.t1();
    sol.t2 = radial.t2();
    sol.u = ScalarField(chart.n_sigma, chart.n_theta);
    sol.from_oracle = true;
    sol.converged = true;
    sol.epsilon = 0.0;
    for (int i = 0; i < chart.n_sigma; ++i) {
        double r = scale * chart.radius(i);
        double v = radial.u_of_r(std::clamp(r, radial.r_in(), radial.r_out()));
        for (int j = 0; j < chart.n_theta; ++j) sol.u(i, j) = v;
    }
    return sol;
}

// --- weak residual and extremum report --------------------------------------

double pde_residual_field(const AnnulusChart& chart, const DiffusivityModel& model,
                          const ScalarField& u, double epsilon, double jump) {
    int ns = chart.n_sigma, nt = chart.n_theta;
    double hs = chart.h_sigma, ht = chart.h_theta;

    // per-cell midpoint gradient and coefficient; the seam column adds the
    // branch jump to wrapped corners
    auto corner = [&](int i, int j) {
        if (j == nt) return u(i, 0) + jump;
        return u(i, j);
    };
    ScalarField g0(ns - 1, nt), g1(ns - 1, nt), kc(ns - 1, nt);
    for (int i = 0; i < ns - 1; ++i)
        for (int j = 0; j < nt; ++j) {
            double u00 = corner(i, j), u10 = corner(i + 1, j);
            double u01 = corner(i, j + 1), u11 = corner(i + 1, j + 1);
            double gs = (u10 + u11 - u00 - u01) / (2.0 * hs);
            double gt = (u01 + u11 - u00 - u10) / (2.0 * ht);
            double mu = 0.25 * (chart.mu(i, j) + chart.mu(i + 1, j) +
                                chart.mu(i, (j + 1) % nt) + chart.mu(i + 1, (j + 1) % nt));
            g0(i, j) = gs;
            g1(i, j) = gt;
            kc(i, j) = model.a(safe_s(model, std::hypot(gs, gt) / mu, epsilon));
        }

    double phi_norm2 = (1.0 / (hs * hs) + 1.0 / (ht * ht)) * hs * ht;
    double worst = 0.0;
    for (int i = 1; i < ns - 1; ++i)
        for (int j = 0; j < nt; ++j) {
            int jm = (j + nt - 1) % nt;
            // the four cells touching node (i, j): (i-1|i) x (jm|j)
            struct CellRef { int ci, cj; double ds, dt; };
            CellRef cells[4] = {
                {i - 1, jm, +0.5 / hs, +0.5 / ht},  // node at high-sigma, high-theta corner
                {i - 1, j, +0.5 / hs, -0.5 / ht},
                {i, jm, -0.5 / hs, +0.5 / ht},
                {i, j, -0.5 / hs, -0.5 / ht},
            };
            double R = 0.0, E = 0.0;
            for (const auto& c : cells) {
                double q2 = g0(c.ci, c.cj) * g0(c.ci, c.cj) + g1(c.ci, c.cj) * g1(c.ci, c.cj);
                R += kc(c.ci, c.cj) * (g0(c.ci, c.cj) * c.ds + g1(c.ci, c.cj) * c.dt) * hs * ht;
                E += kc(c.ci, c.cj) * q2 * hs * ht;
            }
            if (std::abs(R) < 1e-300) continue;
            double denom = std::sqrt(phi_norm2) * std::sqrt(E);
            worst = std::max(worst, std::abs(R) / std::max(denom, 1e-300));
        }
    return worst;
}

double pde_residual(const Solution& sol) {
    return pde_residual_field(*sol.chart, sol.model, sol.u, sol.epsilon, 0.0);
}

ExtremumReport extremum_report(const Solution& sol, double floor) {
    const AnnulusChart& chart = *sol.chart;
    ExtremumReport rep;
    if (floor <= 0.0)
        floor = 1e-6 * (sol.t2 - sol.t1) / std::log(chart.R);
    rep.floor = floor;

    rep.min_u = 1e300;
    rep.max_u = -1e300;
    for (double v : sol.u.values()) {
        rep.min_u = std::min(rep.min_u, v);
        rep.max_u = std::max(rep.max_u, v);
    }

    ScalarField W = grad_norm_g(chart, sol.u);
    rep.min_grad_interior = 1e300;
    rep.min_grad_boundary = 1e300;
    for (int i = 0; i < chart.n_sigma; ++i)
        for (int j = 0; j < chart.n_theta; ++j) {
            if (i == 0 || i == chart.n_sigma - 1) {
                rep.min_grad_boundary = std::min(rep.min_grad_boundary, W(i, j));
            } else if (W(i, j) < rep.min_grad_interior) {
                rep.min_grad_interior = W(i, j);
                rep.argmin_i = i;
                rep.argmin_j = j;
            }
        }
    rep.above_floor = rep.min_grad_interior >= floor;
    return rep;
}

}  // namespace aharm
