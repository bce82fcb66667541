#ifndef BNR_SAMPLERS_HPP
#define BNR_SAMPLERS_HPP

#include <span>
#include <string_view>

#include "bnr/core_types.hpp"
#include "bnr/rng.hpp"

namespace bnr {

// Below this value of chi the GIG draw uses its Gamma limit.
inline constexpr double kGigChiTolerance = 1e-300;

double sample_normal(Rng& rng, double mean = 0.0, double sd = 1.0);
double sample_gamma(double shape, double rate, Rng& rng);
double sample_inverse_gamma(double shape, double rate, Rng& rng);
double sample_beta(double a, double b, Rng& rng);
double sample_chi_squared(double dof, Rng& rng);
int sample_bernoulli(double p, Rng& rng);

/// Inverse Gaussian with the given mean and shape (Michael, Schucany & Haas).
double sample_inverse_gaussian(double mean, double shape, Rng& rng);

/// Generalized inverse Gaussian with density proportional to
///   x^(p-1) exp(-(chi/x + psi*x)/2).
/// p = +-1/2 goes through the exact inverse-Gaussian identity; other p use
/// ratio-of-uniforms / rejection (Hoermann & Leydold 2014). chi below
/// kGigChiTolerance falls back to Gamma(p, psi/2), which requires p > 0.
double sample_gig(double p, double chi, double psi, Rng& rng);

namespace detail {
/// The rejection route for any p, bypassing the p = +-1/2 shortcut.
double sample_gig_rejection(double p, double chi, double psi, Rng& rng);
}  // namespace detail

/// Draw from InverseWishart(scale, dof) via the Bartlett decomposition of
/// the matching Wishart(scale^-1, dof).
Matrix sample_inverse_wishart(const Matrix& scale, double dof, Rng& rng);

/// Draw from N(P^-1 b, tau2 P^-1) using one Cholesky factorization of P.
/// `what` names the update in the NumericalError raised for a non-SPD P.
Vector sample_mvn_precision(const Vector& b, const Matrix& P, double tau2, Rng& rng,
                            std::string_view what = "sample_mvn_precision");

/// Log N(x | mean, cov). A failed Cholesky is retried with diagonal jitter of
/// 1e-10 and then 1e-6 times the mean diagonal before giving up.
double log_mvn_density(const Vector& x, const Vector& mean, const Matrix& cov,
                       std::string_view what = "log_mvn_density");

/// Log N(x | mean, diag(var)).
double log_mvn_density_diag(const Vector& x, const Vector& mean, const Vector& var);

Vector sample_dirichlet(std::span<const double> alpha, Rng& rng);

double log_sum_exp(std::span<const double> values);

/// Index drawn with probability proportional to exp(log_weights[i]).
std::size_t sample_categorical_log(std::span<const double> log_weights, Rng& rng);

}  // namespace bnr

#endif
