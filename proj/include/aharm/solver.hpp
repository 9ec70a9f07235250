#pragma once

#include <memory>

#include "aharm/chart.hpp"
#include "aharm/diffusivity.hpp"

namespace aharm {

struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct oracle_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scheme { picard, newton };

struct SolverOptions {
    double tol = 1e-8;       ///< relative update and scaled weak residual target
    int max_iter = 400;      ///< outer iteration cap
    double epsilon0 = 0.0;   ///< initial gradient regularization; 0 picks
                             ///< 1e-3 (t2-t1)/ln R
    Scheme scheme = Scheme::picard;
    double cg_tol = 1e-10;   ///< relative tolerance of the inner linear solves
    int cg_max_iter = 20000;
    double grad_floor_factor = 1e-6;  ///< extremum report floor: factor*(t2-t1)/ln R
};

/// Converged discrete solution of the Dirichlet problem
/// div(a(|grad u|_g) grad u) = 0, u = t1 on sigma = 0, u = t2 on sigma = ln R.
struct Solution {
    std::shared_ptr<const AnnulusChart> chart;
    DiffusivityModel model;
    ScalarField u;
    double t1 = 0.0;
    double t2 = 1.0;
    double epsilon = 0.0;   ///< final regularization used inside the norm
    int iterations = 0;
    double residual = 0.0;  ///< scaled weak-form residual at exit
    bool converged = false;
    bool from_oracle = false;
};

/// Damped Picard iteration (frozen coefficient a(sqrt(s^2 + eps^2))) with a
/// five-point flux-form operator and Jacobi-preconditioned CG inner solves;
/// epsilon is halved every 20 iterations down to epsilon0/100.  The newton
/// scheme replaces the frozen scalar coefficient by the full gradient
/// linearization assembled on a triangulated grid.
/// Throws solver_error on non-convergence (message carries diagnostics) and
/// structure_error if the converged gradient leaves the model's admissible
/// range.
Solution solve_dirichlet(std::shared_ptr<const AnnulusChart> chart,
                         const DiffusivityModel& model, double t1, double t2,
                         const SolverOptions& opts = {});

/// Rotationally symmetric solution on the flat annulus r in [r_in, r_out]:
/// the flux constancy a(u'(r)) u'(r) r = c determines u' and c is matched to
/// the boundary data by bisection.
class RadialSolution {
public:
    RadialSolution(DiffusivityModel model, double r_in, double r_out, double t1,
                   double t2);

    double c() const { return c_; }
    double r_in() const { return r_in_; }
    double r_out() const { return r_out_; }
    double t1() const { return t1_; }
    double t2() const { return t2_; }
    const DiffusivityModel& model() const { return model_; }

    double uprime_of_r(double r) const;  ///< invert_flux(c / r)
    double u_of_r(double r) const;       ///< t1 + integral of u' from r_in
    double r_of_t(double t) const;       ///< monotone inverse of u_of_r

private:
    DiffusivityModel model_;
    double r_in_, r_out_, t1_, t2_, c_;
};

/// Spec'd flat-annulus oracle on [1, R].
RadialSolution radial_oracle(const DiffusivityModel& model, double R, double t1,
                             double t2);
/// General inner radius variant.
RadialSolution radial_oracle(const DiffusivityModel& model, double r_in,
                             double r_out, double t1, double t2);

/// Samples a radial solution onto a chart (flat or constant-lambda
/// annulus_in_disk charts only); the resulting Solution is flagged
/// from_oracle and carries a zero residual slot until evaluated.
Solution inject_radial(std::shared_ptr<const AnnulusChart> chart,
                       const RadialSolution& radial);

/// Max over interior-node hat functions of the weak-form integral
/// |int a(|grad u|_g) <grad u, grad phi>| normalized by the Cauchy-Schwarz
/// bound on the support (dimensionless, <= 1).
double pde_residual(const Solution& sol);

/// Same evaluation for an arbitrary nodal field under a given model; jump is
/// the additive theta-period of the field across the theta = 0 seam (0 for
/// periodic fields).
double pde_residual_field(const AnnulusChart& chart, const DiffusivityModel& model,
                          const ScalarField& u, double epsilon, double jump = 0.0);

struct ExtremumReport {
    double min_u = 0.0;
    double max_u = 0.0;
    double min_grad_interior = 0.0;
    double min_grad_boundary = 0.0;
    int argmin_i = -1;
    int argmin_j = -1;
    double floor = 0.0;
    bool above_floor = false;
};

ExtremumReport extremum_report(const Solution& sol, double floor = 0.0);

}  // namespace aharm
