#include "hapbutton/sysid.hpp"

#include "hapbutton/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hapbutton::sysid {

namespace {

constexpr double pi = std::numbers::pi;
using cplx = std::complex<double>;

// ---- polynomial helpers ---------------------------------------------------------
// "asc" vectors hold coefficients by ascending power, "desc" by descending.

cplx eval_asc(const std::vector<double>& c, cplx x) {
    cplx acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

cplx eval_desc(const std::vector<double>& c, cplx x) {
    cplx acc = 0.0;
    for (double v : c) acc = acc * x + v;
    return acc;
}

std::vector<double> reversed(std::vector<double> v) {
    std::reverse(v.begin(), v.end());
    return v;
}

std::vector<double> strip_leading_zeros(std::vector<double> desc) {
    const auto first = std::find_if(desc.begin(), desc.end(), [](double v) { return v != 0.0; });
    desc.erase(desc.begin(), first);
    return desc;
}

// Roots through a companion matrix after scaling the variable so that the
// root magnitudes are near one.
std::vector<cplx> roots_desc(std::vector<double> desc) {
    desc = strip_leading_zeros(std::move(desc));
    if (desc.size() <= 1) return {};
    std::vector<cplx> zero_roots;
    while (desc.size() > 1 && desc.back() == 0.0) {
        desc.pop_back();
        zero_roots.emplace_back(0.0);
    }
    const auto n = static_cast<int>(desc.size()) - 1;
    if (n == 0) return zero_roots;
    const double scale = std::pow(std::abs(desc.back() / desc.front()), 1.0 / n);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        // Monic in the scaled variable: coefficient j+1 times scale^{-(j+1)}.
        companion(0, j) = -desc[static_cast<std::size_t>(j + 1)] / desc.front() / std::pow(scale, j + 1);
    }
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) throw NumericFailure("root finding did not converge");
    std::vector<cplx> out = zero_roots;
    for (int i = 0; i < n; ++i) out.push_back(solver.eigenvalues()[i] * scale);
    return out;
}

// Monic real polynomial with the given roots (conjugates assumed paired).
std::vector<double> poly_from_roots_desc(const std::vector<cplx>& roots) {
    std::vector<cplx> c{1.0};
    for (const auto& r : roots) {
        std::vector<cplx> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k] += c[k];
            next[k + 1] -= r * c[k];
        }
        c = std::move(next);
    }
    std::vector<double> out;
    out.reserve(c.size());
    for (const auto& v : c) out.push_back(v.real());
    return out;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

std::vector<double> poly_pow(const std::vector<double>& a, int n) {
    std::vector<double> out{1.0};
    for (int k = 0; k < n; ++k) out = poly_mul(out, a);
    return out;
}

// ---- least squares ---------------------------------------------------------------

struct LsqResult {
    Eigen::VectorXd x;
    bool rank_deficient;
};

LsqResult solve_scaled(Eigen::MatrixXd a, const Eigen::VectorXd& b) {
    Eigen::VectorXd norms = a.colwise().norm();
    for (Eigen::Index j = 0; j < norms.size(); ++j) {
        if (norms(j) == 0.0) norms(j) = 1.0;
        a.col(j) /= norms(j);
    }
    // The threshold must be in place before compute(): the Z factor is built
    // for the rank seen at that moment and solve() trusts rank() afterwards.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a.rows(), a.cols());
    cod.setThreshold(1e-13);
    cod.compute(a);
    Eigen::VectorXd x = cod.solve(b);
    x.array() /= norms.array();
    return {x, cod.rank() < a.cols()};
}

// Fit state in the normalized variable sigma = s / (2 pi f_max) = i f / f_max.
struct ScaledModel {
    std::vector<double> num;  // ascending
    std::vector<double> den;  // ascending, monic
};

struct Grid {
    std::vector<cplx> sigma;
    std::vector<cplx> h;
    std::vector<double> sqrt_w;
    double omega_scale;
    double f_min;
};

Grid make_grid(const FrequencyResponse& h, Weighting weighting) {
    Grid g;
    g.omega_scale = 2.0 * pi * h.frequencies_hz.back();
    g.f_min = h.frequencies_hz.front();
    for (std::size_t k = 0; k < h.size(); ++k) {
        g.sigma.emplace_back(0.0, h.frequencies_hz[k] / h.frequencies_hz.back());
        g.h.push_back(h.values[k]);
        double w = 1.0;
        if (weighting == Weighting::inverse_magnitude) {
            const double mag = std::abs(h.values[k]);
            if (mag == 0.0) throw InvalidInput("inverse-magnitude weighting needs a nonzero FRF everywhere");
            w = 1.0 / mag;
        }
        g.sqrt_w.push_back(std::sqrt(w));
    }
    return g;
}

double weighted_sse(const Grid& g, const ScaledModel& m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < g.h.size(); ++k) {
        const cplx model = eval_asc(m.num, g.sigma[k]) / eval_asc(m.den, g.sigma[k]);
        acc += std::norm(g.sqrt_w[k] * (g.h[k] - model));
    }
    return acc;
}

double relative_error(const Grid& g, const ScaledModel& m) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < g.h.size(); ++k) {
        const cplx model = eval_asc(m.num, g.sigma[k]) / eval_asc(m.den, g.sigma[k]);
        num += std::norm(g.h[k] - model);
        den += std::norm(g.h[k]);
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

// One linearized SK step: minimize sum |r_k (N - H D)|^2 with D monic.
LsqResult sk_step(const Grid& g, int n_poles, int n_zeros, const std::vector<double>& row_scale) {
    const auto k_pts = static_cast<Eigen::Index>(g.h.size());
    const int cols = n_zeros + 1 + n_poles;
    Eigen::MatrixXd a(2 * k_pts, cols);
    Eigen::VectorXd b(2 * k_pts);
    for (Eigen::Index k = 0; k < k_pts; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const double r = row_scale[ku];
        const cplx s = g.sigma[ku];
        const cplx h = g.h[ku];
        cplx power = 1.0;
        for (int j = 0; j <= std::max(n_zeros, n_poles); ++j) {
            if (j <= n_zeros) {
                a(2 * k, j) = r * power.real();
                a(2 * k + 1, j) = r * power.imag();
            }
            if (j < n_poles) {
                const cplx t = -h * power * r;
                a(2 * k, n_zeros + 1 + j) = t.real();
                a(2 * k + 1, n_zeros + 1 + j) = t.imag();
            }
            if (j == n_poles) {
                const cplx rhs = h * power * r;
                b(2 * k) = rhs.real();
                b(2 * k + 1) = rhs.imag();
            }
            power *= s;
        }
    }
    return solve_scaled(std::move(a), b);
}

ScaledModel unpack(const Eigen::VectorXd& x, int n_poles, int n_zeros) {
    ScaledModel m;
    for (int j = 0; j <= n_zeros; ++j) m.num.push_back(x(j));
    for (int j = 0; j < n_poles; ++j) m.den.push_back(x(n_zeros + 1 + j));
    m.den.push_back(1.0);
    return m;
}

// Numerator refit for a fixed denominator: minimize sum w |H - N/D|^2.
std::vector<double> refit_numerator(const Grid& g, const std::vector<double>& den, int n_zeros) {
    const auto k_pts = static_cast<Eigen::Index>(g.h.size());
    Eigen::MatrixXd a(2 * k_pts, n_zeros + 1);
    Eigen::VectorXd b(2 * k_pts);
    for (Eigen::Index k = 0; k < k_pts; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const cplx inv_d = 1.0 / eval_asc(den, g.sigma[ku]);
        cplx power = 1.0;
        for (int j = 0; j <= n_zeros; ++j) {
            const cplx t = g.sqrt_w[ku] * power * inv_d;
            a(2 * k, j) = t.real();
            a(2 * k + 1, j) = t.imag();
            power *= g.sigma[ku];
        }
        const cplx rhs = g.sqrt_w[ku] * g.h[ku];
        b(2 * k) = rhs.real();
        b(2 * k + 1) = rhs.imag();
    }
    const auto x = solve_scaled(std::move(a), b).x;
    return {x.data(), x.data() + x.size()};
}

}  // namespace

// ---- RationalTransferFunction --------------------------------------------------

cplx RationalTransferFunction::evaluate(cplx s) const {
    return eval_desc(numerator, s) / eval_desc(denominator, s);
}

cplx RationalTransferFunction::at_frequency(double hz) const {
    return evaluate(cplx(0.0, 2.0 * pi * hz));
}

std::vector<cplx> RationalTransferFunction::poles() const { return roots_desc(denominator); }
std::vector<cplx> RationalTransferFunction::zeros() const { return roots_desc(numerator); }

bool RationalTransferFunction::is_stable() const {
    const auto p = poles();
    return std::all_of(p.begin(), p.end(), [](cplx v) { return v.real() < 0.0; });
}

RationalTransferFunction RationalTransferFunction::normalized_dc() const {
    const double d0 = denominator.back();
    const double n0 = numerator.back();
    if (d0 == 0.0 || n0 == 0.0) throw NumericFailure("DC gain is zero or infinite; cannot normalize");
    RationalTransferFunction out = *this;
    for (double& v : out.numerator) v *= d0 / n0;
    out.dc_normalized = true;
    return out;
}

ModalParameters modal_parameters(cplx pole) {
    const double mag = std::abs(pole);
    return {mag / (2.0 * pi), mag == 0.0 ? 0.0 : -pole.real() / mag};
}

// ---- fitting --------------------------------------------------------------------

RationalTransferFunction fit_transfer_function(const FrequencyResponse& h, int n_poles, int n_zeros,
                                               const FitOptions& opts) {
    if (n_poles < 0 || n_zeros < 0 || n_zeros > n_poles) {
        throw InvalidParameter("need 0 <= n_zeros <= n_poles (got " + std::to_string(n_zeros) + " zeros, " +
                               std::to_string(n_poles) + " poles)");
    }
    h.validate();
    if (h.frequencies_hz.front() <= 0.0) throw InvalidInput("fit grid must exclude 0 Hz");
    const auto needed = static_cast<std::size_t>(2 * (n_poles + n_zeros + 2));
    if (h.size() < needed) {
        throw InvalidInput("fit of " + std::to_string(n_poles) + " poles / " + std::to_string(n_zeros) +
                           " zeros needs at least " + std::to_string(needed) + " FRF points, got " +
                           std::to_string(h.size()));
    }
    const Grid g = make_grid(h, opts.weighting);

    FitInfo info;
    info.points = h.size();
    const double margin = opts.min_decay_fraction * g.f_min / h.frequencies_hz.back();
    int reflected_total = 0;
    auto stabilize = [&](std::vector<double>& den_asc, double min_decay) {
        auto p = roots_desc(reversed(den_asc));
        int moved = 0;
        for (auto& pole : p) {
            if (std::abs(pole) < min_decay) {
                // Below the fitted band the data cannot place a pole; near-origin
                // poles become slow real decays instead of integrators.
                if (pole != cplx(-min_decay, 0.0)) {
                    pole = cplx(-min_decay, 0.0);
                    ++moved;
                }
            } else if (pole.real() >= 0.0) {
                pole = cplx(-pole.real(), pole.imag());
                if (pole.real() > -min_decay) pole = cplx(-min_decay, pole.imag());
                ++moved;
            }
        }
        if (moved > 0) den_asc = reversed(poly_from_roots_desc(p));
        reflected_total = std::max(reflected_total, moved);
        return moved;
    };
    std::vector<double> row_scale = g.sqrt_w;
    ScaledModel best;
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<double> prev_den;
    info.converged = false;
    for (int it = 1; it <= std::max(1, opts.max_iterations); ++it) {
        const auto step = sk_step(g, n_poles, n_zeros, row_scale);
        if (!step.x.allFinite()) throw NumericFailure("least-squares step produced non-finite coefficients");
        info.rank_deficient = step.rank_deficient;
        ScaledModel m = unpack(step.x, n_poles, n_zeros);
        if (opts.enforce_stability && n_poles > 0) {
            const int moved = stabilize(m.den, margin);
            if (moved > 0) m.num = refit_numerator(g, m.den, n_zeros);
        }
        const double sse = weighted_sse(g, m);
        info.iterations = it;
        if (std::isfinite(sse) && sse < best_sse) {
            best_sse = sse;
            best = m;
        }
        if (n_poles == 0) {
            info.converged = true;
            break;
        }
        if (!prev_den.empty()) {
            double change = 0.0, scale = 1.0;
            for (std::size_t j = 0; j < m.den.size(); ++j) {
                change = std::max(change, std::abs(m.den[j] - prev_den[j]));
                scale = std::max(scale, std::abs(prev_den[j]));
            }
            if (change <= opts.tolerance * scale) {
                info.converged = true;
                break;
            }
        }
        prev_den = m.den;
        for (std::size_t k = 0; k < g.sigma.size(); ++k) {
            const double mag = std::abs(eval_asc(m.den, g.sigma[k]));
            if (!(mag > 0.0) || !std::isfinite(mag)) {
                throw NumericFailure("denominator vanished on the frequency grid");
            }
            row_scale[k] = g.sqrt_w[k] / mag;
        }
    }
    if (!std::isfinite(best_sse)) throw NumericFailure("no finite fit found");

    if (opts.enforce_stability && n_poles > 0) {
        // The iterate is stable already unless root finding disagrees at the
        // margin; one more pass settles it.
        if (stabilize(best.den, margin) > 0) best.num = refit_numerator(g, best.den, n_zeros);
    }
    info.poles_reflected = reflected_total;

    info.weighted_sse = weighted_sse(g, best);
    info.relative_error = relative_error(g, best);

    RationalTransferFunction out;
    out.quantity = h.quantity;
    out.fit = info;
    // Back to s: multiply N and D by omega^n_poles; the s^j coefficient
    // picks up omega^(n_poles - j).
    for (int j = n_zeros; j >= 0; --j) {
        out.numerator.push_back(best.num[static_cast<std::size_t>(j)] * std::pow(g.omega_scale, n_poles - j));
    }
    for (int j = n_poles; j >= 0; --j) {
        out.denominator.push_back(best.den[static_cast<std::size_t>(j)] * std::pow(g.omega_scale, n_poles - j));
    }
    return out;
}

OrderSelection select_order(const FrequencyResponse& h, int min_poles, int max_poles,
                            const SelectOptions& opts) {
    if (min_poles < 0 || max_poles < min_poles) throw InvalidParameter("empty pole-order range");
    h.validate();
    double reference = 0.0;
    for (const auto& v : h.values) {
        const double w = opts.fit.weighting == Weighting::inverse_magnitude && std::abs(v) > 0.0
                             ? 1.0 / std::abs(v)
                             : 1.0;
        reference += w * std::norm(v);
    }
    const double floor = std::max(opts.sse_floor * reference, std::numeric_limits<double>::min());
    const auto n_points = static_cast<double>(h.size());

    OrderSelection out;
    std::optional<RationalTransferFunction> best;
    double best_criterion = std::numeric_limits<double>::infinity();
    std::string failures;
    for (int np = min_poles; np <= max_poles; ++np) {
        const int nz = std::max(0, np - opts.relative_degree);
        try {
            auto model = fit_transfer_function(h, np, nz, opts.fit);
            const double sse = std::max(model.fit.weighted_sse, floor);
            const double criterion = n_points * std::log(sse) + 2.0 * (np + nz + 1);
            out.candidates.push_back({np, nz, criterion, model.fit.relative_error, {}});
            if (criterion < best_criterion) {
                best_criterion = criterion;
                best = std::move(model);
            }
        } catch (const Error& e) {
            out.candidates.push_back({np, nz, std::numeric_limits<double>::infinity(),
                                      std::numeric_limits<double>::infinity(), e.what()});
            failures += "\n  " + std::to_string(np) + " poles: " + e.what();
        }
    }
    if (!best) throw NumericFailure("every candidate order failed:" + failures);
    out.model = std::move(*best);
    return out;
}

// ---- state space -------------------------------------------------------------------

PlateModels fit_plate_models(const FrequencyResponse& acceleration_per_volt, double floor_fraction,
                             int min_poles, int max_poles, const SelectOptions& opts) {
    const FrequencyResponse h = drop_nonpositive_frequencies(acceleration_per_volt);
    if (h.quantity != FrfQuantity::acceleration_per_volt) {
        throw InvalidInput("plate models need an acceleration-per-volt FRF");
    }
    const FrequencyResponse inverted = invert_frf(h, floor_fraction);
    double peak = 0.0;
    for (const auto& v : h.values) peak = std::max(peak, std::abs(v));
    FrequencyResponse kept;
    kept.quantity = inverted.quantity;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (std::abs(h.values[k]) >= floor_fraction * peak) {
            kept.frequencies_hz.push_back(h.frequencies_hz[k]);
            kept.values.push_back(inverted.values[k]);
        }
    }
    if (kept.size() < 2) throw InvalidInput("fewer than two FRF bins clear the inversion floor");
    PlateModels out{select_order(h, min_poles, max_poles, opts), select_order(kept, min_poles, max_poles, opts),
                    kept.frequencies_hz.front()};
    return out;
}

double StateSpaceModel::stability_margin_value() const {
    if (A.rows() == 0) return discrete ? 0.0 : -std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, false);
    double v = discrete ? 0.0 : -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const cplx ev = solver.eigenvalues()[i];
        v = discrete ? std::max(v, std::abs(ev)) : std::max(v, ev.real());
    }
    return v;
}

bool StateSpaceModel::is_stable() const {
    const double v = stability_margin_value();
    return discrete ? v < 1.0 : v < 0.0;
}

namespace {

// Controllable canonical form of (b0 + b1 q + ... + bn q^n) / (1 + a1 q + ... + an q^n)
// where q is z^-1 (discrete) or the realization is of the monic s-form.
StateSpaceModel canonical(const std::vector<double>& num, const std::vector<double>& den) {
    // num and den have equal length n + 1, den[0] == 1.
    const auto n = static_cast<Eigen::Index>(den.size()) - 1;
    StateSpaceModel m;
    m.A = Eigen::MatrixXd::Zero(n, n);
    m.B = Eigen::VectorXd::Zero(n);
    m.C = Eigen::RowVectorXd::Zero(n);
    m.D = num[0];
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto ju = static_cast<std::size_t>(j + 1);
        m.A(0, j) = -den[ju];
        m.C(j) = num[ju] - den[ju] * num[0];
    }
    for (Eigen::Index i = 1; i < n; ++i) m.A(i, i - 1) = 1.0;
    if (n > 0) m.B(0) = 1.0;
    return m;
}

std::vector<double> padded_numerator(const RationalTransferFunction& g) {
    auto num = strip_leading_zeros(g.numerator);
    if (num.empty()) num.push_back(0.0);
    if (num.size() > g.denominator.size()) throw InvalidParameter("improper transfer function");
    std::vector<double> out(g.denominator.size() - num.size(), 0.0);
    out.insert(out.end(), num.begin(), num.end());
    return out;
}

void check_model(const RationalTransferFunction& g) {
    if (g.denominator.empty() || g.denominator.front() == 0.0) {
        throw InvalidParameter("denominator leading coefficient must be nonzero");
    }
}

}  // namespace

StateSpaceModel realize_continuous(const RationalTransferFunction& g) {
    check_model(g);
    auto num = padded_numerator(g);
    auto den = g.denominator;
    const double lead = den.front();
    for (double& v : num) v /= lead;
    for (double& v : den) v /= lead;
    auto m = canonical(num, den);
    m.discrete = false;
    m.sample_rate_hz = 0.0;
    m.quantity = g.quantity;
    return m;
}

StateSpaceModel to_discrete(const RationalTransferFunction& g, double rate_hz) {
    check_model(g);
    if (!(rate_hz > 0.0)) throw InvalidParameter("sample rate must be positive");
    const auto poles = g.poles();
    for (const auto& p : poles) {
        if (!(p.real() < 0.0)) throw InvalidParameter("cannot discretize an unstable model");
        if (std::abs(p) / (2.0 * pi) * 2.0 >= rate_hz) {
            throw InvalidParameter("rate " + std::to_string(rate_hz) + " Hz is not above twice the pole frequency " +
                                   std::to_string(std::abs(p) / (2.0 * pi)) + " Hz");
        }
    }
    const int n = g.n_poles();
    const double c = 2.0 * rate_hz;
    const auto num_s = padded_numerator(g);
    const auto& den_s = g.denominator;

    // Substitute s = c (z - 1) / (z + 1) and clear (z + 1)^n.
    auto substitute = [&](const std::vector<double>& desc) {
        std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
        for (int j = 0; j <= n; ++j) {
            const double coeff = desc[static_cast<std::size_t>(n - j)] * std::pow(c, j);
            if (coeff == 0.0) continue;
            const auto term = poly_mul(poly_pow({1.0, -1.0}, j), poly_pow({1.0, 1.0}, n - j));
            for (std::size_t i = 0; i < term.size(); ++i) out[i] += coeff * term[i];
        }
        return out;
    };
    auto num_z = substitute(num_s);
    auto den_z = substitute(den_s);
    const double lead = den_z.front();
    if (lead == 0.0) throw NumericFailure("Tustin map produced a degenerate denominator");
    for (double& v : num_z) v /= lead;
    for (double& v : den_z) v /= lead;

    auto m = canonical(num_z, den_z);
    m.discrete = true;
    m.sample_rate_hz = rate_hz;
    m.quantity = g.quantity;
    if (!m.is_stable()) throw NumericFailure("discretized model is not stable");
    return m;
}

TimeSeries simulate(const StateSpaceModel& m, const TimeSeries& u) {
    if (!m.discrete) throw InvalidParameter("simulate needs a discrete model");
    if (std::abs(m.sample_rate_hz - u.sample_rate_hz()) > 1e-9 * u.sample_rate_hz()) {
        throw InvalidParameter("input rate " + std::to_string(u.sample_rate_hz()) +
                               " Hz differs from model rate " + std::to_string(m.sample_rate_hz) + " Hz");
    }
    Unit unit = Unit::dimensionless;
    if (m.quantity == FrfQuantity::volt_per_acceleration) unit = Unit::voltage_V;
    if (m.quantity == FrfQuantity::acceleration_per_volt) unit = Unit::acceleration_m_s2;

    std::vector<double> y(u.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m.order());
    Eigen::VectorXd next(m.order());
    for (std::size_t k = 0; k < u.size(); ++k) {
        y[k] = m.C.dot(x) + m.D * u[k];
        next.noalias() = m.A * x;
        next += m.B * u[k];
        x.swap(next);
    }
    return TimeSeries(std::move(y), u.sample_rate_hz(), unit, u.t0_s());
}

TimeSeries render_voltage(const representative::ButtonProfile& profile,
                          const RationalTransferFunction& plate_inverse, const synth::SynthConfig& cfg,
                          double peak_to_peak_V) {
    if (!(peak_to_peak_V > 0.0)) throw InvalidParameter("peak-to-peak voltage must be positive");
    const auto target = synth::modulate(profile.representative_acceleration, cfg);
    auto v = simulate(to_discrete(plate_inverse, cfg.output_rate_hz), target);
    const auto [lo, hi] = std::minmax_element(v.samples().begin(), v.samples().end());
    const double span = *hi - *lo;
    std::vector<double> scaled(v.samples().begin(), v.samples().end());
    for (double& s : scaled) s = span > 0.0 ? s * (peak_to_peak_V / span) : 0.0;
    return TimeSeries(std::move(scaled), v.sample_rate_hz(), Unit::voltage_V, v.t0_s());
}

TimeSeries reconstruct(const TimeSeries& voltage, const RationalTransferFunction& plate_forward) {
    auto a = simulate(to_discrete(plate_forward, voltage.sample_rate_hz()), voltage);
    return TimeSeries(std::vector<double>(a.samples().begin(), a.samples().end()), a.sample_rate_hz(),
                      Unit::acceleration_m_s2, a.t0_s());
}

Comparison compare_waveforms(const TimeSeries& reference, const TimeSeries& estimate,
                             const ComparisonOptions& opts) {
    const std::size_t n = std::min(reference.size(), estimate.size());
    auto ref = reference.slice(0, n);
    auto est = estimate.slice(0, n);
    if (opts.band_hz) {
        ref = bandlimit(ref, opts.band_hz->first, opts.band_hz->second);
        est = bandlimit(est, opts.band_hz->first, opts.band_hz->second);
    }
    const auto r = ref.samples();
    const auto e = est.samples();
    const double ref_rms = rms(r);
    if (ref_rms == 0.0) throw InvalidInput("comparison reference is identically zero");

    Comparison out{synth::nrmse(r, e), std::numeric_limits<double>::infinity(), 0.0, 0};
    const auto max_lag = static_cast<long>(std::llround(opts.max_lag_s * reference.sample_rate_hz()));
    const auto len = static_cast<long>(n);
    for (long lag = -max_lag; lag <= max_lag; ++lag) {
        // Pair r[k] with e[k + lag] over the overlap.
        const long k0 = std::max(0L, -lag);
        const long k1 = std::min(len, len - lag);
        if (k1 - k0 < 2) continue;
        double re = 0.0, ee = 0.0;
        for (long k = k0; k < k1; ++k) {
            re += r[static_cast<std::size_t>(k)] * e[static_cast<std::size_t>(k + lag)];
            ee += e[static_cast<std::size_t>(k + lag)] * e[static_cast<std::size_t>(k + lag)];
        }
        const double gain = ee > 0.0 ? re / ee : 0.0;
        double err = 0.0, rr = 0.0;
        for (long k = k0; k < k1; ++k) {
            const double rv = r[static_cast<std::size_t>(k)];
            const double d = rv - gain * e[static_cast<std::size_t>(k + lag)];
            err += d * d;
            rr += rv * rv;
        }
        if (rr == 0.0) continue;
        const double value = std::sqrt(err / rr);
        if (value < out.nrmse_aligned) {
            out.nrmse_aligned = value;
            out.gain = gain;
            out.lag_samples = lag;
        }
    }
    return out;
}

}  // namespace hapbutton::sysid
