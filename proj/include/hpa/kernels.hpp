#pragma once

#include <cmath>
#include <complex>
#include <variant>

#include "hpa/errors.hpp"

namespace hpa {

/// Point mass at lag tau: h(s) = delta(s - tau). tau >= 0 (tau = 0 means no delay).
struct DiracKernel {
    double tau = 0;
};

/// Gamma density h(s) = s^{p-1} e^{-s/beta} / (beta^p (p-1)!), p >= 1 integer, beta > 0.
/// p = 1 is the exponential ("weak gamma") kernel with rate a = 1/beta.
struct GammaKernel {
    int p = 1;
    double beta = 1;
};

using DelayKernel = std::variant<DiracKernel, GammaKernel>;

inline void validate(const DelayKernel& k) {
    if (const auto* d = std::get_if<DiracKernel>(&k)) {
        if (!(d->tau >= 0) || !std::isfinite(d->tau))
            throw ConfigError("Dirac kernel: tau must be a finite non-negative real");
    } else {
        const auto& g = std::get<GammaKernel>(k);
        if (g.p < 1) throw ConfigError("Gamma kernel: p must be a positive integer");
        if (!(g.beta > 0) || !std::isfinite(g.beta))
            throw ConfigError("Gamma kernel: beta must be a positive real");
    }
}

/// Mean of the kernel density: tau for Dirac, p*beta for Gamma.
inline double mean_delay(const DelayKernel& k) {
    if (const auto* d = std::get_if<DiracKernel>(&k)) return d->tau;
    const auto& g = std::get<GammaKernel>(k);
    return static_cast<double>(g.p) * g.beta;
}

/// Laplace transform of the kernel density evaluated at lambda:
/// Dirac(tau) -> exp(-lambda tau); Gamma(p, beta) -> (1 + beta lambda)^{-p}.
/// Both equal 1 at lambda = 0 (unit-mass normalization).
/// Throws PoleRegion for Gamma kernels at real lambda <= -1/beta.
inline std::complex<double> laplace(const DelayKernel& k, std::complex<double> lambda) {
    if (const auto* d = std::get_if<DiracKernel>(&k)) return std::exp(-lambda * d->tau);
    const auto& g = std::get<GammaKernel>(k);
    if (lambda.imag() == 0.0 && lambda.real() <= -1.0 / g.beta)
        throw PoleRegion("Gamma kernel transform evaluated at real lambda <= -1/beta");
    const std::complex<double> base = 1.0 + g.beta * lambda;
    std::complex<double> pw = 1.0;
    for (int i = 0; i < g.p; ++i) pw *= base;
    return 1.0 / pw;
}

} // namespace hpa
