#include "qbound/distributions.hpp"

#include <cmath>
#include <sstream>

#include "qbound/errors.hpp"
#include "qbound/mathutil.hpp"

namespace qbound {

namespace {

double factorial_over_pow(int r, double rate) {
    // r! / rate^r
    double v = 1.0;
    for (int j = 1; j <= r; ++j) v *= j / rate;
    return v;
}

}

ServiceDistribution ServiceDistribution::exponential(double rate) {
    if (!(rate > 0.0)) throw DomainError("exponential: rate must be > 0");
    ServiceDistribution d;
    d.kind_ = DistKind::Exponential;
    d.a_ = rate;
    return d;
}

ServiceDistribution ServiceDistribution::deterministic(double value) {
    if (!(value > 0.0)) throw DomainError("deterministic: value must be > 0");
    ServiceDistribution d;
    d.kind_ = DistKind::Deterministic;
    d.a_ = value;
    return d;
}

ServiceDistribution ServiceDistribution::erlang(int shape, double rate) {
    if (shape < 1) throw DomainError("erlang: shape must be a positive integer");
    if (!(rate > 0.0)) throw DomainError("erlang: rate must be > 0");
    ServiceDistribution d;
    d.kind_ = DistKind::Erlang;
    d.a_ = rate;
    d.shape_ = shape;
    return d;
}

ServiceDistribution ServiceDistribution::uniform(double lo, double hi) {
    if (!(lo >= 0.0)) throw DomainError("uniform: lo must be >= 0");
    if (!(hi > lo)) throw DomainError("uniform: hi must exceed lo");
    ServiceDistribution d;
    d.kind_ = DistKind::Uniform;
    d.a_ = lo;
    d.b_ = hi;
    return d;
}

ServiceDistribution ServiceDistribution::hyperexponential(std::vector<double> weights,
                                                          std::vector<double> rates) {
    if (weights.empty() || weights.size() != rates.size())
        throw DomainError("hyperexponential: weights/rates must be non-empty and equal length");
    double wsum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) throw DomainError("hyperexponential: weights must be >= 0");
        if (!(rates[i] > 0.0)) throw DomainError("hyperexponential: rates must be > 0");
        wsum += weights[i];
    }
    if (std::fabs(wsum - 1.0) > 1e-12)
        throw DomainError("hyperexponential: weights must sum to 1 within 1e-12");
    ServiceDistribution d;
    d.kind_ = DistKind::HyperExponential;
    d.weights_ = std::move(weights);
    d.rates_ = std::move(rates);
    double c = 0.0;
    for (double w : d.weights_) d.wcum_.push_back(c += w);
    d.wcum_.back() = 1.0;
    return d;
}

double ServiceDistribution::moment(int r) const {
    if (r < 1) throw DomainError("moment: order must be >= 1");
    switch (kind_) {
        case DistKind::Exponential:
            return factorial_over_pow(r, a_);
        case DistKind::Deterministic:
            return std::pow(a_, r);
        case DistKind::Erlang: {
            // E X^r = (k)(k+1)...(k+r-1) / rate^r
            double v = 1.0;
            for (int j = 0; j < r; ++j) v *= (shape_ + j) / a_;
            return v;
        }
        case DistKind::Uniform: {
            double num = std::pow(b_, r + 1) - std::pow(a_, r + 1);
            return num / ((r + 1) * (b_ - a_));
        }
        case DistKind::HyperExponential: {
            double v = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i)
                v += weights_[i] * factorial_over_pow(r, rates_[i]);
            return v;
        }
    }
    return 0.0;
}

double ServiceDistribution::s0() const {
    switch (kind_) {
        case DistKind::Exponential:
            return a_;
        case DistKind::Erlang:
            return a_;
        case DistKind::HyperExponential: {
            double m = kInf;
            for (double r : rates_) m = std::min(m, r);
            return m;
        }
        default:
            return kInf;
    }
}

double ServiceDistribution::mgf(double s) const {
    if (s >= s0())
        throw DomainError("mgf: transform diverges at s >= s0");
    switch (kind_) {
        case DistKind::Exponential:
            return a_ / (a_ - s);
        case DistKind::Deterministic:
            return std::exp(s * a_);
        case DistKind::Erlang:
            return std::pow(a_ / (a_ - s), shape_);
        case DistKind::Uniform: {
            if (std::fabs(s) * b_ < 1e-3) {
                // E e^{sX} = sum_j s^j m_j / j!
                double v = 1.0, sj = 1.0;
                for (int j = 1; j <= 4; ++j) {
                    sj *= s / j;
                    v += sj * moment(j);
                }
                return v;
            }
            return (std::exp(s * b_) - std::exp(s * a_)) / (s * (b_ - a_));
        }
        case DistKind::HyperExponential: {
            double v = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i)
                v += weights_[i] * rates_[i] / (rates_[i] - s);
            return v;
        }
    }
    return 0.0;
}

double ServiceDistribution::mgf_prime(double s) const {
    if (s >= s0())
        throw DomainError("mgf_prime: transform diverges at s >= s0");
    switch (kind_) {
        case DistKind::Exponential:
            return a_ / ((a_ - s) * (a_ - s));
        case DistKind::Deterministic:
            return a_ * std::exp(s * a_);
        case DistKind::Erlang:
            return shape_ * std::pow(a_ / (a_ - s), shape_) / (a_ - s);
        case DistKind::Uniform: {
            if (std::fabs(s) * b_ < 1e-3) {
                // E X e^{sX} = sum_j s^j m_{j+1} / j!
                double v = moment(1), sj = 1.0;
                for (int j = 1; j <= 4; ++j) {
                    sj *= s / j;
                    v += sj * moment(j + 1);
                }
                return v;
            }
            double eb = std::exp(s * b_), ea = std::exp(s * a_);
            return (eb * (s * b_ - 1.0) - ea * (s * a_ - 1.0)) / (s * s * (b_ - a_));
        }
        case DistKind::HyperExponential: {
            double v = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i) {
                double d = rates_[i] - s;
                v += weights_[i] * rates_[i] / (d * d);
            }
            return v;
        }
    }
    return 0.0;
}

double ServiceDistribution::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind_) {
        case DistKind::Exponential:
            return -std::expm1(-a_ * x);
        case DistKind::Deterministic:
            return x > a_ ? 1.0 : 0.0;  // P(X < x)
        case DistKind::Erlang:
            return erlang_cdf(shape_, a_, x);
        case DistKind::Uniform: {
            if (x <= a_) return 0.0;
            if (x >= b_) return 1.0;
            return (x - a_) / (b_ - a_);
        }
        case DistKind::HyperExponential: {
            double v = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i)
                v += weights_[i] * -std::expm1(-rates_[i] * x);
            return v;
        }
    }
    return 0.0;
}

double ServiceDistribution::tail(double x) const {
    if (kind_ == DistKind::Deterministic) return x < a_ ? 1.0 : 0.0;
    return 1.0 - cdf(x);
}

double ServiceDistribution::partial_mean_above(double t) const {
    if (t <= 0.0) return mean();
    switch (kind_) {
        case DistKind::Exponential:
            return (t + 1.0 / a_) * std::exp(-a_ * t);
        case DistKind::Deterministic:
            return t <= a_ ? a_ : 0.0;
        case DistKind::Erlang:
            // ∫_t^∞ y f(y) dy = (k/rate) * P(Erlang(k+1, rate) > t)
            return (shape_ / a_) * (1.0 - erlang_cdf(shape_ + 1, a_, t));
        case DistKind::Uniform: {
            if (t >= b_) return 0.0;
            double lo = std::max(t, a_);
            return (b_ * b_ - lo * lo) / (2.0 * (b_ - a_));
        }
        case DistKind::HyperExponential: {
            double v = 0.0;
            for (std::size_t i = 0; i < weights_.size(); ++i)
                v += weights_[i] * (t + 1.0 / rates_[i]) * std::exp(-rates_[i] * t);
            return v;
        }
    }
    return 0.0;
}

double ServiceDistribution::sample(RngStream& rng) const {
    switch (kind_) {
        case DistKind::Exponential:
            return rng.exponential(a_);
        case DistKind::Deterministic:
            return a_;
        case DistKind::Erlang: {
            double s = 0.0;
            for (int j = 0; j < shape_; ++j) s += rng.exponential(a_);
            return s;
        }
        case DistKind::Uniform:
            return a_ + rng.u01() * (b_ - a_);
        case DistKind::HyperExponential: {
            double u = rng.u01();
            std::size_t i = 0;
            while (i + 1 < wcum_.size() && u > wcum_[i]) ++i;
            return rng.exponential(rates_[i]);
        }
    }
    return 0.0;
}

std::string ServiceDistribution::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case DistKind::Exponential:
            os << "exponential(rate=" << a_ << ")";
            break;
        case DistKind::Deterministic:
            os << "deterministic(value=" << a_ << ")";
            break;
        case DistKind::Erlang:
            os << "erlang(shape=" << shape_ << ", rate=" << a_ << ")";
            break;
        case DistKind::Uniform:
            os << "uniform(lo=" << a_ << ", hi=" << b_ << ")";
            break;
        case DistKind::HyperExponential: {
            os << "hyperexponential(";
            for (std::size_t i = 0; i < weights_.size(); ++i) {
                if (i) os << ", ";
                os << weights_[i] << "@" << rates_[i];
            }
            os << ")";
            break;
        }
    }
    return os.str();
}

}
