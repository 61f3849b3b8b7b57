#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sgval {

/// Adam over a flat parameter vector. The learning rate is passed per step
/// so that callers can drive any schedule.
class Adam {
public:
    explicit Adam(std::size_t parameter_count, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

    void step(std::span<double> params, std::span<const double> grads, double learning_rate);
    std::size_t steps() const noexcept { return t_; }

private:
    double beta1_;
    double beta2_;
    double epsilon_;
    std::size_t t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

/// False once any parameter is non-finite or too large to store in a
/// single-precision checkpoint.
bool parameters_in_range(std::span<const double> params);

/// Cosine annealing from `base` towards zero over `total` epochs.
double cosine_annealed(double base, std::size_t epoch, std::size_t total);

}  // namespace sgval
