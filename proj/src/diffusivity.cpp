#include "aharm/diffusivity.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include <json.hpp>

namespace aharm {

namespace {

double finite_or_throw(double v, double s, const char* what) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << what << " evaluated non-finite at s = " << s;
        throw evaluation_error(os.str());
    }
    return v;
}

}  // namespace

DiffusivityModel::DiffusivityModel(std::string name, ModelKind kind,
                                   std::function<double(double)> a,
                                   std::function<double(double)> a_prime,
                                   double alpha, double beta,
                                   std::map<std::string, double> params,
                                   double s_max, double s_struct)
    : name_(std::move(name)),
      kind_(kind),
      a_(std::move(a)),
      aprime_(std::move(a_prime)),
      alpha_(alpha),
      beta_(beta),
      s_max_(s_max),
      s_struct_(s_struct > 0.0 ? s_struct : s_max),
      params_(std::move(params)) {
    if (!(alpha_ >= 0.0) || !(beta_ > 0.0) || alpha_ > beta_)
        throw domain_error("structure bounds must satisfy 0 <= alpha <= beta, beta > 0");
    if (!(s_max_ > 0.0)) throw domain_error("s_max must be positive");
    if (s_struct_ > s_max_) throw domain_error("s_struct cannot exceed s_max");
}

double DiffusivityModel::param(const std::string& key) const {
    auto it = params_.find(key);
    if (it == params_.end()) throw domain_error("model '" + name_ + "' has no parameter " + key);
    return it->second;
}

double DiffusivityModel::a(double s) const {
    if (!(s > 0.0)) throw domain_error("a(s) requires s > 0");
    double v = a_(s);
    finite_or_throw(v, s, "a");
    if (!(v > 0.0)) {
        std::ostringstream os;
        os << "a(s) must be positive, got " << v << " at s = " << s;
        throw evaluation_error(os.str());
    }
    return v;
}

double DiffusivityModel::a_prime(double s) const {
    if (!(s > 0.0)) throw domain_error("a'(s) requires s > 0");
    if (aprime_) return finite_or_throw(aprime_(s), s, "a'");
    // relative central difference fallback for user models
    double h = 1e-6 * s;
    double hi = std::min(s + h, s_max_ * (1.0 - 1e-12));
    double lo = s - h;
    return finite_or_throw((a_(hi) - a_(lo)) / (hi - lo), s, "a'");
}

double DiffusivityModel::D(double s) const { return a_prime(s) * s / a(s); }

DiffusivityModel user_model(std::string name, std::function<double(double)> a,
                            double alpha, double beta,
                            std::function<double(double)> a_prime, double s_max) {
    return DiffusivityModel(std::move(name), ModelKind::user, std::move(a),
                            std::move(a_prime), alpha, beta, {}, s_max);
}

DiffusivityModel p_harmonic_model(double p) {
    if (!(p > 1.0)) throw domain_error("p_harmonic requires p > 1");
    return DiffusivityModel(
        "p_harmonic", ModelKind::p_harmonic,
        [p](double s) { return std::pow(s, p - 2.0); },
        [p](double s) { return (p - 2.0) * std::pow(s, p - 3.0); },
        p - 1.0, p - 1.0, {{"p", p}});
}

DiffusivityModel minimal_surface_model() {
    // 1 + a'(s)s/a(s) = 1/(1+s^2), so the honest lower bound is 0.
    return DiffusivityModel(
        "minimal_surface", ModelKind::minimal_surface,
        [](double s) { return 1.0 / std::sqrt(1.0 + s * s); },
        [](double s) { return -s * std::pow(1.0 + s * s, -1.5); },
        0.0, 1.0);
}

DiffusivityModel subsonic_gas_model(double gamma) {
    if (!(gamma > 1.0)) throw domain_error("subsonic_gas requires gamma > 1");
    // F increases while 1 + D > 0, i.e. up to the sonic speed; the
    // (alpha, 1) bounds hold on the narrower subsonic range s <= 2/(gamma+1),
    // where 1 + D reaches exactly (gamma^2-1)/(gamma^2+3).
    double smax = std::sqrt(2.0 / (gamma + 1.0));
    double sstruct = 2.0 / (gamma + 1.0);
    double alpha = (gamma * gamma - 1.0) / (gamma * gamma + 3.0);
    return DiffusivityModel(
        "subsonic_gas", ModelKind::subsonic_gas,
        [gamma](double s) {
            return std::pow(1.0 - 0.5 * (gamma - 1.0) * s * s, 1.0 / (gamma - 1.0));
        },
        [gamma](double s) {
            return -s * std::pow(1.0 - 0.5 * (gamma - 1.0) * s * s,
                                 (2.0 - gamma) / (gamma - 1.0));
        },
        alpha, 1.0, {{"gamma", gamma}}, smax, std::min(sstruct, smax));
}

DiffusivityModel maximal_lorentz_model(double cap) {
    if (!(cap > 0.0 && cap < 1.0)) throw domain_error("maximal_lorentz requires 0 < cap < 1");
    double beta = 1.0 / (1.0 - cap * cap);
    return DiffusivityModel(
        "maximal_lorentz", ModelKind::maximal_lorentz,
        [](double s) { return 1.0 / std::sqrt(1.0 - s * s); },
        [](double s) { return s * std::pow(1.0 - s * s, -1.5); },
        1.0, beta, {{"cap", cap}}, 1.0, cap);
}

namespace {

// Piecewise-log construction in the variables t = -log s, f(t) = log a(s).
// f is linear with slopes in {0, 1/2, -2}; corners blend over a window of
// 1% of the shorter adjacent segment using the quintic smoothstep, which
// keeps f' inside the hull of the adjacent slopes and makes f C^2.
struct ValtortaSkeleton {
    std::vector<double> t;      // corner positions, increasing
    std::vector<double> f;      // f at corners
    std::vector<double> slope;  // slope[i] on (t[i], t[i+1]); slope.back() beyond last
    std::vector<double> window; // half-width of the blend at corner i

    double left_slope(size_t c) const { return c > 0 ? slope[c - 1] : 0.0; }

    double eval(double tt, double* deriv) const {
        size_t k = std::upper_bound(t.begin(), t.end(), tt) - t.begin();
        // blend windows around the corners adjacent to tt
        for (size_t c : {k > 0 ? k - 1 : size_t(0), std::min(k, t.size() - 1)}) {
            double w = window[c];
            if (w > 0.0 && std::abs(tt - t[c]) < w) {
                double s1 = left_slope(c);
                double s2 = slope[c];
                double x = (tt - (t[c] - w)) / (2.0 * w);
                double S = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
                double I = x * x * x * x * (2.5 + x * (-3.0 + x));
                double f0 = f[c] - s1 * w;
                if (deriv) *deriv = s1 + (s2 - s1) * S;
                return f0 + s1 * (tt - (t[c] - w)) + (s2 - s1) * 2.0 * w * I;
            }
        }
        if (k == 0) {  // flat tail before the first corner
            if (deriv) *deriv = 0.0;
            return f.front();
        }
        size_t seg = k - 1;
        if (deriv) *deriv = slope[seg];
        return f[seg] + slope[seg] * (tt - t[seg]);
    }
};

ValtortaSkeleton valtorta_skeleton(unsigned long long seed) {
    std::mt19937_64 gen(seed);
    double t0 = 0.5 + (gen() >> 11) * (1.0 / 9007199254740992.0);  // [0.5, 1.5)

    // Corners alternate between touching the lower envelope -t and the upper
    // envelope sqrt(t); slope 1/2 climbing, -2 descending.
    std::vector<double> corners{t0};
    std::vector<double> values{-t0};
    // cover every t with e^{-t} representable in double (t <= ~745)
    double tc = t0, fc = -t0;
    bool up = true;
    while (tc < 800.0) {
        if (up) {
            // f_c + (t - t_c)/2 = sqrt(t); quadratic in x = sqrt(t)
            double Bc = fc - 0.5 * tc;
            double x = 1.0 + std::sqrt(1.0 - 2.0 * Bc);
            tc = x * x;
            fc = std::sqrt(tc);
        } else {
            // f_c - 2 (t - t_c) = -t
            tc = fc + 2.0 * tc;
            fc = -tc;
        }
        corners.push_back(tc);
        values.push_back(fc);
        up = !up;
    }

    ValtortaSkeleton sk;
    sk.t = corners;
    sk.f = values;
    sk.slope.assign(corners.size(), 0.0);
    bool s_up = true;
    for (size_t i = 0; i + 1 < corners.size(); ++i) {
        sk.slope[i] = s_up ? 0.5 : -2.0;
        s_up = !s_up;
    }
    sk.slope.back() = sk.slope[sk.slope.size() - 2];  // continue past the last corner

    sk.window.assign(corners.size(), 0.0);
    for (size_t i = 0; i < corners.size(); ++i) {
        double left = i > 0 ? corners[i] - corners[i - 1]
                            : std::numeric_limits<double>::infinity();
        double right = i + 1 < corners.size() ? corners[i + 1] - corners[i]
                                              : std::numeric_limits<double>::infinity();
        double len = std::min(left, right);
        sk.window[i] = 0.01 * (std::isfinite(len) ? len : 1.0);
    }
    return sk;
}

}  // namespace

DiffusivityModel valtorta_model(unsigned long long seed) {
    auto sk = std::make_shared<ValtortaSkeleton>(valtorta_skeleton(seed));
    auto f_of_s = [sk](double s) {
        double t = -std::log(s);
        if (t <= sk->t.front() - sk->window.front())
            return std::pair<double, double>{sk->f.front(), 0.0};
        double d = 0.0;
        double v = sk->eval(t, &d);
        return std::pair<double, double>{v, d};
    };
    return DiffusivityModel(
        "valtorta", ModelKind::valtorta,
        [f_of_s](double s) { return std::exp(f_of_s(s).first); },
        // a'(s) = a(s) * f'(t) * dt/ds = -a(s) f'(t) / s
        [f_of_s](double s) {
            auto [v, d] = f_of_s(s);
            return -std::exp(v) * d / s;
        },
        0.5, 3.0, {{"seed", static_cast<double>(seed)}});
}

const char* to_string(LogBoundClass c) {
    switch (c) {
        case LogBoundClass::upper_bounded: return "upper-bounded";
        case LogBoundClass::lower_bounded: return "lower-bounded";
        case LogBoundClass::both: return "both";
        case LogBoundClass::neither: return "neither";
    }
    return "?";
}

std::vector<double> log_space(double lo, double hi, int n) {
    std::vector<double> out;
    out.reserve(n);
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        out.push_back(std::exp(llo + (lhi - llo) * i / double(n - 1)));
    return out;
}

StructureReport structure_report(const DiffusivityModel& model,
                                 const std::vector<double>& s_grid) {
    if (s_grid.empty()) throw domain_error("structure_report: empty grid");
    for (size_t i = 1; i < s_grid.size(); ++i)
        if (!(s_grid[i] > s_grid[i - 1]))
            throw domain_error("structure_report: grid must be strictly increasing");

    StructureReport rep;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::vector<double> s_used, log_a;
    for (double s : s_grid) {
        if (s >= model.s_struct() * (1.0 - 1e-9)) continue;
        double one_plus_D = 1.0 + model.D(s);
        lo = std::min(lo, one_plus_D);
        hi = std::max(hi, one_plus_D);
        s_used.push_back(s);
        log_a.push_back(std::log(model.a(s)));
    }
    if (s_used.empty())
        throw domain_error("structure_report: no grid point inside (0, s_struct)");
    rep.alpha_hat = lo;
    rep.beta_hat = hi;
    rep.holds_A = lo > 1e-9;

    // s a(s) -> 0: the log-log slope of s a(s) near the bottom of the grid
    // equals 1 + D > 0 whenever the limit is 0.
    {
        double s1 = s_used.front();
        double v1 = s1 * model.a(s1);
        double s2 = s1;
        for (double s : s_used)
            if (s >= 8.0 * s1) { s2 = s; break; }
        if (s2 > s1) {
            double v2 = s2 * model.a(s2);
            double slope = (std::log(v2) - std::log(v1)) / (std::log(s2) - std::log(s1));
            rep.holds_Aprime = slope > 0.01 || v1 < 1e-10;
        } else {
            rep.holds_Aprime = v1 < 1e-10;
        }
    }

    // Boundedness class of log a on (0,1]: compare the first decade (0.1, 1]
    // against the deeper part of the grid.  A clear new record deep down
    // signals unboundedness on that side.
    {
        double shal_max = -std::numeric_limits<double>::infinity();
        double shal_min = std::numeric_limits<double>::infinity();
        double deep_max = -std::numeric_limits<double>::infinity();
        double deep_min = std::numeric_limits<double>::infinity();
        bool have_shal = false, have_deep = false;
        for (size_t i = 0; i < s_used.size(); ++i) {
            if (s_used[i] > 1.0) continue;
            if (s_used[i] > 0.1) {
                shal_max = std::max(shal_max, log_a[i]);
                shal_min = std::min(shal_min, log_a[i]);
                have_shal = true;
            } else {
                deep_max = std::max(deep_max, log_a[i]);
                deep_min = std::min(deep_min, log_a[i]);
                have_deep = true;
            }
        }
        bool upper = true, lower = true;
        if (have_shal && have_deep) {
            upper = deep_max <= shal_max + 0.5;
            lower = deep_min >= shal_min - 0.5;
        }
        if (upper && lower) rep.A2_class = LogBoundClass::both;
        else if (upper) rep.A2_class = LogBoundClass::upper_bounded;
        else if (lower) rep.A2_class = LogBoundClass::lower_bounded;
        else rep.A2_class = LogBoundClass::neither;
    }
    return rep;
}

StructureReport structure_report(const DiffusivityModel& model) {
    double hi = std::min(1e3, model.s_struct() * (1.0 - 1e-6));
    return structure_report(model, log_space(1e-6, hi, 2000));
}

double flux_map(const DiffusivityModel& model, double t) {
    if (!(t > 0.0)) throw domain_error("flux_map requires t > 0");
    return model.a(t) * t;
}

namespace {

double bisect_increasing(const std::function<double(double)>& F, double w,
                         double s_cap, const char* what) {
    if (!(w > 0.0)) throw domain_error(std::string(what) + ": requires w > 0");
    double lo = std::min(1.0, 0.5 * s_cap);
    double hi = lo;
    // expand the bracket; approach s_cap geometrically when it is finite
    for (int i = 0; i < 400 && F(lo) > w; ++i) lo *= 0.5;
    if (F(lo) > w) throw domain_error(std::string(what) + ": failed to bracket from below");
    if (std::isfinite(s_cap)) {
        double gap = s_cap - hi;
        int i = 0;
        while (F(hi) < w) {
            gap *= 0.5;
            hi = s_cap - gap;
            if (++i > 200) {
                // range of F is bounded and w exceeds it
                throw domain_error(std::string(what) + ": value outside the range of the map");
            }
        }
    } else {
        int i = 0;
        double prev = F(hi);
        while (prev < w) {
            hi *= 2.0;
            double cur = F(hi);
            // stagnating map: w sits at or above a finite sup of the range
            if (cur <= prev * (1.0 + 4e-13) && cur < w)
                throw domain_error(std::string(what) + ": value outside the range of the map");
            prev = cur;
            if (++i > 400) throw domain_error(std::string(what) + ": failed to bracket from above");
        }
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (F(mid) < w) lo = mid; else hi = mid;
        if (hi - lo <= 1e-12 * std::min(std::abs(lo), std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double invert_flux(const DiffusivityModel& model, double w) {
    return bisect_increasing([&](double s) { return model.a(s) * s; }, w,
                             model.s_max(), "invert_flux");
}

double half_flux_map(const DiffusivityModel& model, double s) {
    if (!(s > 0.0)) throw domain_error("half_flux_map requires s > 0");
    return std::sqrt(model.a(s)) * s;
}

double invert_half_flux(const DiffusivityModel& model, double w) {
    return bisect_increasing([&](double s) { return std::sqrt(model.a(s)) * s; }, w,
                             model.s_max(), "invert_half_flux");
}

DiffusivityModel conjugate_model(const DiffusivityModel& model) {
    // b(t) = 1/a(F^{-1}(t)); 1 + b't/b = 1/(1 + a's/a) at s = F^{-1}(t)
    auto base = std::make_shared<DiffusivityModel>(model);
    double alpha_c = std::isfinite(model.beta()) ? 1.0 / model.beta() : 0.0;
    double beta_c = model.alpha() > 0 ? 1.0 / model.alpha()
                                      : std::numeric_limits<double>::infinity();
    // The domain of b is the range of F.  F is unbounded when s_max is an
    // interior singularity (Lorentz) or when F keeps growing; it is bounded
    // for the minimal surface operator, detected by stagnation at large s.
    double t_max = std::numeric_limits<double>::infinity();
    if (!std::isfinite(model.s_max())) {
        double f1 = model.a(1e9) * 1e9;
        double f2 = model.a(4e9) * 4e9;
        if (f2 < f1 * (1.0 + 1e-6)) t_max = f2;  // flux range bounded by ~f2
    }
    double t_struct = t_max;
    if (model.s_struct() < model.s_max())
        t_struct = std::min(t_max, flux_map(model, model.s_struct() * (1.0 - 1e-12)));
    return DiffusivityModel(
        "conj(" + model.name() + ")", ModelKind::conjugate,
        [base](double t) { return 1.0 / base->a(invert_flux(*base, t)); },
        [base](double t) {
            double s = invert_flux(*base, t);
            double a = base->a(s), ap = base->a_prime(s);
            return -ap / (a * a * a) / (1.0 + ap * s / a);
        },
        alpha_c, beta_c, {}, t_max, t_struct);
}

EllipticCoefficients elliptic_coefficients_at_D(double D) {
    if (!(D > -1.0)) {
        std::ostringstream os;
        os << "elliptic coefficients require D > -1, got D = " << D;
        throw structure_error(os.str());
    }
    EllipticCoefficients ec;
    ec.D = D;
    ec.B = 0.5 * D / (D + 2.0);
    ec.C = -D / (3.0 * D + 4.0);
    ec.B_ratio = D / (D + 4.0);
    ec.abs_sum = std::abs(ec.C + ec.B_ratio) + std::abs(ec.C - ec.B_ratio);
    return ec;
}

EllipticCoefficients elliptic_coefficients(const DiffusivityModel& model, double s) {
    if (!(s > 0.0)) throw domain_error("elliptic_coefficients requires s > 0");
    return elliptic_coefficients_at_D(model.D(s));
}

CordesConstants cordes_constants(double alpha, double beta, double c1) {
    if (!(alpha > 0.0) || alpha > beta)
        throw domain_error("cordes_constants requires 0 < alpha <= beta");
    double threshold = (1.0 + beta * beta) / (2.0 * alpha);
    if (c1 <= 0.0) c1 = 1.01 * threshold;  // fixed margin over the strict inequality
    if (!(c1 > threshold))
        throw domain_error("cordes_constants: c1 must exceed (1+beta^2)/(2 alpha)");
    CordesConstants cc;
    cc.alpha = alpha;
    cc.beta = beta;
    cc.c1 = c1;
    cc.c2 = (c1 * c1 - 1.0) / (2.0 * c1 * alpha - 1.0 - beta * beta);
    return cc;
}

double riccati_gamma(double p, double q, double s) {
    if (!(p > 1.0) || !(q >= 1.0) || !(s > 0.0))
        throw domain_error("riccati_gamma requires p > 1, q >= 1, s > 0");
    return 2.0 * p / (3.0 * p - 2.0) * std::pow(s, q - 1.0 - 0.5 * p);
}

std::string model_to_json(const DiffusivityModel& model) {
    nlohmann::ordered_json j;
    switch (model.kind()) {
        case ModelKind::p_harmonic: j["name"] = "p_harmonic"; break;
        case ModelKind::minimal_surface: j["name"] = "minimal_surface"; break;
        case ModelKind::subsonic_gas: j["name"] = "subsonic_gas"; break;
        case ModelKind::maximal_lorentz: j["name"] = "maximal_lorentz"; break;
        case ModelKind::valtorta: j["name"] = "valtorta"; break;
        default: throw domain_error("only builtin models serialize to JSON");
    }
    j["params"] = model.params();
    return j.dump();
}

DiffusivityModel model_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    std::string name = j.at("name").get<std::string>();
    auto params = j.value("params", nlohmann::json::object());
    if (name == "p_harmonic") return p_harmonic_model(params.at("p").get<double>());
    if (name == "minimal_surface") return minimal_surface_model();
    if (name == "subsonic_gas") return subsonic_gas_model(params.at("gamma").get<double>());
    if (name == "maximal_lorentz") return maximal_lorentz_model(params.at("cap").get<double>());
    if (name == "valtorta")
        return valtorta_model(static_cast<unsigned long long>(params.value("seed", 1.0)));
    throw domain_error("unknown model name: " + name);
}

}  // namespace aharm
