#pragma once

#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace aharm {

/// Thrown when a model parameter is outside its admissible range.
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when evaluating a(s) produces a non-finite value.
struct evaluation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a structure condition (ellipticity) is violated.
struct structure_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ModelKind {
    p_harmonic,
    minimal_surface,
    subsonic_gas,
    maximal_lorentz,
    valtorta,
    conjugate,
    user,
};

/// A scalar diffusivity a(s) on (0, s_max) together with its derivative and
/// the structure bounds alpha <= 1 + a'(s)s/a(s) <= beta.  Immutable after
/// construction; all evaluations are pure so models can be shared freely
/// across threads.
///
/// alpha may be zero for the minimal-surface growth class, where the lower
/// structure bound degenerates as s -> infinity.
class DiffusivityModel {
public:
    DiffusivityModel(std::string name, ModelKind kind,
                     std::function<double(double)> a,
                     std::function<double(double)> a_prime,
                     double alpha, double beta,
                     std::map<std::string, double> params = {},
                     double s_max = std::numeric_limits<double>::infinity(),
                     double s_struct = 0.0);

    const std::string& name() const { return name_; }
    ModelKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    /// Upper end of the range where a is defined and the flux map is strictly
    /// increasing (the sonic/light-speed limit for the gas and Lorentz
    /// operators, infinite otherwise).
    double s_max() const { return s_max_; }
    /// Upper end of the range on which the (alpha, beta) bounds are claimed;
    /// equals s_max unless the model narrows it (gas: 2/(gamma+1), Lorentz:
    /// the gradient cap).
    double s_struct() const { return s_struct_; }
    const std::map<std::string, double>& params() const { return params_; }
    double param(const std::string& key) const;

    /// a(s).  Throws evaluation_error on non-finite results.
    double a(double s) const;
    /// a'(s), analytic for builtin models and central-difference for user
    /// models (relative step 1e-6 * s).
    double a_prime(double s) const;
    /// D(s) = a'(s) s / a(s).
    double D(double s) const;

private:
    std::string name_;
    ModelKind kind_;
    std::function<double(double)> a_;
    std::function<double(double)> aprime_;
    double alpha_;
    double beta_;
    double s_max_;
    double s_struct_;
    std::map<std::string, double> params_;
};

/// Construct a user model from callables; the derivative falls back to a
/// central finite difference when not supplied.
DiffusivityModel user_model(std::string name, std::function<double(double)> a,
                            double alpha, double beta,
                            std::function<double(double)> a_prime = nullptr,
                            double s_max = std::numeric_limits<double>::infinity());

DiffusivityModel p_harmonic_model(double p);
DiffusivityModel minimal_surface_model();
DiffusivityModel subsonic_gas_model(double gamma);
DiffusivityModel maximal_lorentz_model(double cap);
/// Operator whose log oscillates between -t and sqrt(t) in t = -log s,
/// with blend-smoothed slopes 1/2 and -2.  Satisfies the two growth
/// conditions with alpha = 1/2, beta = 3 but log a is neither upper nor
/// lower bounded near 0.  The corner layout is deterministic in the seed.
DiffusivityModel valtorta_model(unsigned long long seed);

/// Boundedness classification of log a(s) on (0, 1].
enum class LogBoundClass { upper_bounded, lower_bounded, both, neither };

const char* to_string(LogBoundClass c);

struct StructureReport {
    double alpha_hat = 0.0;  ///< min of 1 + D(s) over the sample grid
    double beta_hat = 0.0;   ///< max of 1 + D(s) over the sample grid
    bool holds_A = false;    ///< alpha_hat > 0 within tolerance
    bool holds_Aprime = false;  ///< s a(s) -> 0 sampled near 0
    LogBoundClass A2_class = LogBoundClass::both;
};

/// Log-spaced grid in [lo, hi]; clips to the model's admissible range when
/// used for structure checks.
std::vector<double> log_space(double lo, double hi, int n);

/// Sampled verification of the structure conditions on a positive grid.
/// The grid must be nonempty and strictly increasing; points at or beyond
/// s_max are clipped away.
StructureReport structure_report(const DiffusivityModel& model,
                                 const std::vector<double>& s_grid);

StructureReport structure_report(const DiffusivityModel& model);

/// F(t) = a(t) t, strictly increasing under the structure condition.
double flux_map(const DiffusivityModel& model, double t);
/// Bisection inverse of F with relative tolerance 1e-12 (expanding
/// bracket, 200 iteration cap).  Throws domain_error for w outside the
/// closure of the range of F.
double invert_flux(const DiffusivityModel& model, double w);

/// A(s) = a^(1/2)(s) s and its bisection inverse.
double half_flux_map(const DiffusivityModel& model, double s);
double invert_half_flux(const DiffusivityModel& model, double w);

/// Conjugate operator b(t) = 1 / a(F^{-1}(t)).  Swaps the structure bounds
/// to (1/beta, 1/alpha); the derivative uses the closed form through the
/// flux inverse.  Conjugation is an involution.
DiffusivityModel conjugate_model(const DiffusivityModel& model);

/// Coefficient package of the first order complex system at gradient s.
struct EllipticCoefficients {
    double D = 0.0;
    double B = 0.0;        ///< D / (2 (D + 2))
    double C = 0.0;        ///< -D / (3 D + 4)
    double B_ratio = 0.0;  ///< B / (1 - B) = D / (D + 4)
    double abs_sum = 0.0;  ///< |C + B_ratio| + |C - B_ratio|, < 2 for D > -1
};

/// Throws structure_error when D(s) <= -1.
EllipticCoefficients elliptic_coefficients(const DiffusivityModel& model, double s);
EllipticCoefficients elliptic_coefficients_at_D(double D);

struct CordesConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// c1 defaults to 1.01 * (1 + beta^2) / (2 alpha); pass an explicit c1 above
/// the threshold to override.  c2 = (c1^2 - 1) / (2 c1 alpha - 1 - beta^2).
CordesConstants cordes_constants(double alpha, double beta, double c1 = 0.0);

/// Coefficient of the bounded right-hand side in the Riccati-type extension:
/// 2p/(3p-2) * s^(q - 1 - p/2).  Independent of s exactly when q = 1 + p/2.
double riccati_gamma(double p, double q, double s);

/// {"name": ..., "params": {...}} round trip for model specs.
std::string model_to_json(const DiffusivityModel& model);
DiffusivityModel model_from_json(const std::string& text);

}  // namespace aharm
