#include "sgval/adam.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sgval {

Adam::Adam(std::size_t parameter_count, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads, double learning_rate) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw std::invalid_argument("Adam::step: parameter count changed");
    }
    ++t_;
    const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
        const double m_hat = m_[i] / correction1;
        const double v_hat = v_[i] / correction2;
        params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
}

bool parameters_in_range(std::span<const double> params) {
    constexpr double limit = std::numeric_limits<float>::max();
    for (double p : params) {
        if (!(std::abs(p) <= limit)) return false;
    }
    return true;
}

double cosine_annealed(double base, std::size_t epoch, std::size_t total) {
    if (total == 0) return base;
    return base * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(total)));
}

}  // namespace sgval
