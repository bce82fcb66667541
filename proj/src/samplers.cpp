#include "bnr/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace bnr {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double gig_mode(double lambda, double omega) {
    if (lambda >= 1.0) {
        return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) /
               omega;
    }
    return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// The three generators below draw Y ~ GIG(lambda, omega, omega) for
// lambda >= 0, i.e. density proportional to y^(lambda-1) exp(-omega/2 (y + 1/y)).

double gig_rou_noshift(double lambda, double omega, Rng& rng) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
    const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) /
                      omega;
    const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
    for (;;) {
        const double U = um * rng.uniform();
        const double V = rng.uniform();
        const double X = U / V;
        if (std::log(V) <= t * std::log(X) - s * (X + 1.0 / X) - nc) return X;
    }
}

double gig_rou_shift(double lambda, double omega, Rng& rng) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

    // Cubic whose roots bound the minimal bounding rectangle.
    const double a = -(2.0 * (lambda + 1.0) / omega + xm);
    const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    const double c = xm;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
    const double fak = 2.0 * std::sqrt(-p / 3.0);
    const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
    const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
    const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
    const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

    for (;;) {
        const double U = uminus + rng.uniform() * (uplus - uminus);
        const double V = rng.uniform();
        const double X = U / V + xm;
        if (X <= 0.0) continue;
        if (std::log(V) <= t * std::log(X) - s * (X + 1.0 / X) - nc) return X;
    }
}

// Dominating density for 0 <= lambda < 1 and small omega.
double gig_small_omega(double lambda, double omega, Rng& rng) {
    const double xm = gig_mode(lambda, omega);
    const double x0 = omega / (1.0 - lambda);
    const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
    double A[3];
    A[0] = k0 * x0;
    double k1 = 0.0;
    double k2 = 0.0;
    if (x0 >= 2.0 / omega) {
        A[1] = 0.0;
        k2 = std::pow(x0, lambda - 1.0);
        A[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
    } else {
        k1 = std::exp(-omega);
        A[1] = (lambda == 0.0) ? k1 * std::log(2.0 / (omega * omega))
                               : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
        k2 = std::pow(2.0 / omega, lambda - 1.0);
        A[2] = k2 * 2.0 * std::exp(-1.0) / omega;
    }
    const double Atot = A[0] + A[1] + A[2];

    for (;;) {
        double V = Atot * rng.uniform();
        double X = 0.0;
        double hx = 0.0;
        if (V <= A[0]) {
            X = x0 * V / A[0];
            hx = k0;
        } else if (V <= A[0] + A[1]) {
            V -= A[0];
            if (lambda == 0.0) {
                X = omega * std::exp(std::exp(omega) * V);
                hx = k1 / X;
            } else {
                X = std::pow(std::pow(x0, lambda) + lambda / k1 * V, 1.0 / lambda);
                hx = k1 * std::pow(X, lambda - 1.0);
            }
        } else {
            V -= A[0] + A[1];
            const double lo = (x0 > 2.0 / omega) ? x0 : 2.0 / omega;
            X = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * V);
            hx = k2 * std::exp(-omega / 2.0 * X);
        }
        const double U = rng.uniform() * hx;
        if (std::log(U) <= (lambda - 1.0) * std::log(X) - omega / 2.0 * (X + 1.0 / X)) return X;
    }
}

double standard_gig(double lambda, double omega, Rng& rng) {
    if (lambda > 2.0 || omega > 3.0) return gig_rou_shift(lambda, omega, rng);
    if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
        return gig_rou_noshift(lambda, omega, rng);
    }
    return gig_small_omega(lambda, omega, rng);
}

}  // namespace

double sample_normal(Rng& rng, double mean, double sd) {
    boost::random::normal_distribution<double> dist(0.0, 1.0);
    return mean + sd * dist(rng);
}

double sample_gamma(double shape, double rate, Rng& rng) {
    require(shape > 0.0 && std::isfinite(shape), "gamma: shape must be positive");
    require(rate > 0.0 && std::isfinite(rate), "gamma: rate must be positive");
    boost::random::gamma_distribution<double> dist(shape, 1.0);
    return dist(rng) / rate;
}

double sample_inverse_gamma(double shape, double rate, Rng& rng) {
    require(shape > 0.0, "inverse_gamma: shape must be positive");
    require(rate > 0.0, "inverse_gamma: rate must be positive");
    return 1.0 / sample_gamma(shape, rate, rng);
}

double sample_beta(double a, double b, Rng& rng) {
    require(a > 0.0 && b > 0.0, "beta: shape parameters must be positive");
    const double x = sample_gamma(a, 1.0, rng);
    const double y = sample_gamma(b, 1.0, rng);
    return x / (x + y);
}

double sample_chi_squared(double dof, Rng& rng) {
    require(dof > 0.0, "chi_squared: degrees of freedom must be positive");
    return sample_gamma(0.5 * dof, 0.5, rng);
}

int sample_bernoulli(double p, Rng& rng) {
    require(p >= 0.0 && p <= 1.0, "bernoulli: p must lie in [0, 1]");
    return rng.uniform() < p ? 1 : 0;
}

double sample_inverse_gaussian(double mean, double shape, Rng& rng) {
    require(mean > 0.0 && shape > 0.0, "inverse_gaussian: mean and shape must be positive");
    const double nu = sample_normal(rng);
    const double y = nu * nu;
    // Smaller root of the quadratic, written as mean / (1 + r + sqrt(r^2 + 2r))
    // to avoid cancellation when mean/shape is large.
    const double r = mean * y / (2.0 * shape);
    const double x = mean / (1.0 + r + std::sqrt(r * r + 2.0 * r));
    if (rng.uniform() * (mean + x) <= mean) return x;
    return mean * (mean / x);
}

double detail::sample_gig_rejection(double p, double chi, double psi, Rng& rng) {
    require(psi > 0.0, "gig: psi must be positive");
    require(chi > 0.0, "gig: rejection route needs chi > 0");
    const double omega = std::sqrt(chi * psi);
    const double alpha = std::sqrt(chi / psi);
    if (p < 0.0) {
        return alpha / standard_gig(-p, omega, rng);
    }
    return alpha * standard_gig(p, omega, rng);
}

double sample_gig(double p, double chi, double psi, Rng& rng) {
    require(psi > 0.0 && std::isfinite(psi), "gig: psi must be positive");
    require(chi >= 0.0 && std::isfinite(chi), "gig: chi must be nonnegative");
    require(std::isfinite(p), "gig: p must be finite");
    if (chi < kGigChiTolerance) {
        require(p > 0.0, "gig: chi = 0 needs p > 0 (Gamma limit)");
        return sample_gamma(p, psi / 2.0, rng);
    }
    if (p == 0.5) {
        // 1/X ~ GIG(-1/2, psi, chi) = InverseGaussian(sqrt(psi/chi), psi)
        return 1.0 / sample_inverse_gaussian(std::sqrt(psi / chi), psi, rng);
    }
    if (p == -0.5) {
        return sample_inverse_gaussian(std::sqrt(chi / psi), chi, rng);
    }
    return detail::sample_gig_rejection(p, chi, psi, rng);
}

Matrix sample_inverse_wishart(const Matrix& scale, double dof, Rng& rng) {
    const Eigen::Index R = scale.rows();
    if (scale.cols() != R || R == 0) {
        throw std::invalid_argument("inverse_wishart: scale must be square");
    }
    if (!(dof > static_cast<double>(R) - 1.0)) {
        throw std::invalid_argument("inverse_wishart: dof must exceed R - 1");
    }
    Eigen::LLT<Matrix> scale_llt(scale);
    if (scale_llt.info() != Eigen::Success || !scale.isApprox(scale.transpose(), 1e-10)) {
        throw NumericalError("inverse_wishart: scale matrix is not symmetric positive definite");
    }
    const Matrix precision = scale_llt.solve(Matrix::Identity(R, R));
    Eigen::LLT<Matrix> prec_llt(0.5 * (precision + precision.transpose()));
    if (prec_llt.info() != Eigen::Success) {
        throw NumericalError("inverse_wishart: inverse scale is not positive definite");
    }
    Matrix bartlett = Matrix::Zero(R, R);
    for (Eigen::Index i = 0; i < R; ++i) {
        bartlett(i, i) = std::sqrt(sample_chi_squared(dof - static_cast<double>(i), rng));
        for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = sample_normal(rng);
    }
    const Matrix LA = prec_llt.matrixL() * bartlett;
    const Matrix wishart = LA * LA.transpose();
    Eigen::LLT<Matrix> w_llt(wishart);
    if (w_llt.info() != Eigen::Success) {
        throw NumericalError("inverse_wishart: Wishart draw is singular");
    }
    Matrix out = w_llt.solve(Matrix::Identity(R, R));
    return 0.5 * (out + out.transpose());
}

Vector sample_mvn_precision(const Vector& b, const Matrix& P, double tau2, Rng& rng,
                            std::string_view what) {
    if (P.rows() != P.cols() || P.rows() != b.size()) {
        throw std::invalid_argument("sample_mvn_precision: dimension mismatch");
    }
    Eigen::LLT<Matrix> llt(P);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(what) + ": precision matrix is not positive definite");
    }
    const Vector mean = llt.solve(b);
    Vector z(b.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sample_normal(rng);
    // L^-T z has covariance P^-1.
    llt.matrixU().solveInPlace(z);
    Vector out = mean + std::sqrt(tau2) * z;
    if (!out.allFinite()) {
        throw NumericalError(std::string(what) + ": non-finite draw");
    }
    return out;
}

double log_mvn_density(const Vector& x, const Vector& mean, const Matrix& cov,
                       std::string_view what) {
    const Eigen::Index d = x.size();
    if (mean.size() != d || cov.rows() != d || cov.cols() != d) {
        throw std::invalid_argument("log_mvn_density: dimension mismatch");
    }
    if (d == 0) return 0.0;
    const double mean_diag = cov.diagonal().mean();
    static constexpr double kJitter[] = {0.0, 1e-10, 1e-6};
    for (double jitter : kJitter) {
        Matrix c = cov;
        if (jitter > 0.0) c.diagonal().array() += jitter * std::abs(mean_diag);
        Eigen::LLT<Matrix> llt(c);
        if (llt.info() != Eigen::Success) continue;
        const Vector z = llt.matrixL().solve(x - mean);
        const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        const double value = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) +
                                     log_det + z.squaredNorm());
        if (std::isfinite(value)) return value;
    }
    throw NumericalError(std::string(what) + ": covariance is not positive definite after jitter");
}

double log_mvn_density_diag(const Vector& x, const Vector& mean, const Vector& var) {
    if (mean.size() != x.size() || var.size() != x.size()) {
        throw std::invalid_argument("log_mvn_density_diag: dimension mismatch");
    }
    const auto d = static_cast<double>(x.size());
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + var.array().log().sum() +
                   ((x - mean).array().square() / var.array()).sum());
}

Vector sample_dirichlet(std::span<const double> alpha, Rng& rng) {
    require(!alpha.empty(), "dirichlet: empty parameter vector");
    Vector g(static_cast<Eigen::Index>(alpha.size()));
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        require(alpha[j] > 0.0, "dirichlet: parameters must be positive");
        g(static_cast<Eigen::Index>(j)) = sample_gamma(alpha[j], 1.0, rng);
    }
    return g / g.sum();
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - m);
    return m + std::log(sum);
}

std::size_t sample_categorical_log(std::span<const double> log_weights, Rng& rng) {
    const double total = log_sum_exp(log_weights);
    if (!std::isfinite(total)) {
        throw NumericalError("categorical: no finite log weight");
    }
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
        cum += std::exp(log_weights[i] - total);
        if (u < cum) return i;
    }
    // Rounding left cum slightly below 1: return the last index with mass.
    for (std::size_t i = log_weights.size(); i-- > 0;) {
        if (std::isfinite(log_weights[i])) return i;
    }
    return log_weights.size() - 1;
}

}  // namespace bnr
