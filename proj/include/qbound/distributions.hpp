#ifndef QBOUND_DISTRIBUTIONS_HPP
#define QBOUND_DISTRIBUTIONS_HPP

#include <limits>
#include <string>
#include <vector>

#include "qbound/rng.hpp"

namespace qbound {

enum class DistKind { Exponential, Deterministic, Erlang, Uniform, HyperExponential };

// Parametric positive law used for service times, cycle summands and renewal
// increments.  All five families have finite moments of every order; the CDF
// uses the P(X < x) convention, so the deterministic point mass jumps *after*
// its atom.
class ServiceDistribution {
public:
    static ServiceDistribution exponential(double rate);
    static ServiceDistribution deterministic(double value);
    static ServiceDistribution erlang(int shape, double rate);
    static ServiceDistribution uniform(double lo, double hi);
    static ServiceDistribution hyperexponential(std::vector<double> weights,
                                                std::vector<double> rates);

    DistKind kind() const { return kind_; }

    // E X^r, closed form, r >= 1.
    double moment(int r) const;
    double mean() const { return moment(1); }

    // E exp(sX); throws DomainError for s >= s0().
    double mgf(double s) const;
    // d/ds E exp(sX) = E X exp(sX), same domain.
    double mgf_prime(double s) const;
    // Abscissa past which the transform diverges (infinity when entire).
    double s0() const;

    double cdf(double x) const;   // P(X < x)
    double tail(double x) const;  // P(X > x)
    // ∫_t^∞ y dF(y); partial_mean_above(0) == mean().
    double partial_mean_above(double t) const;

    double sample(RngStream& rng) const;

    std::string describe() const;

    // Parameter accessors (valid per kind).
    double rate() const { return a_; }
    double value() const { return a_; }
    double lo() const { return a_; }
    double hi() const { return b_; }
    int shape() const { return shape_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& rates() const { return rates_; }

private:
    ServiceDistribution() = default;

    DistKind kind_ = DistKind::Exponential;
    double a_ = 0.0, b_ = 0.0;
    int shape_ = 0;
    std::vector<double> weights_, rates_, wcum_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}

#endif
