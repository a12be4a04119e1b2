#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace savar {

enum class ComponentKind {
    f1_linear,      // 0.2 x
    f2_sine,        // -0.15 sin(1.5 x)
    f3_gauss_cdf,   // -0.5 Phi(x - 0.5)
    f4_gauss_bump,  // 0.2 x exp(-x^2 / 2)
    f5_log_abs,     // 0.15 log(|x| + 2)
    zero,
    linear_coef,    // a x
    custom,
};

/// A univariate transition component h_jk together with its Lipschitz
/// constant. Immutable; cheap to copy.
class ComponentFunction {
public:
    ComponentFunction() = default;  // zero

    static ComponentFunction f1() { return ComponentFunction(ComponentKind::f1_linear); }
    static ComponentFunction f2() { return ComponentFunction(ComponentKind::f2_sine); }
    static ComponentFunction f3() { return ComponentFunction(ComponentKind::f3_gauss_cdf); }
    static ComponentFunction f4() { return ComponentFunction(ComponentKind::f4_gauss_bump); }
    static ComponentFunction f5() { return ComponentFunction(ComponentKind::f5_log_abs); }
    static ComponentFunction zero() { return ComponentFunction(ComponentKind::zero); }
    static ComponentFunction linear(double coefficient);
    /// Named benchmark function, index 1..5.
    static ComponentFunction benchmark(int index);
    /// Without a declared constant the component is accepted but
    /// lipschitz_constant() refuses it.
    static ComponentFunction custom(std::function<double(double)> fn,
                                    std::optional<double> lipschitz, std::string name = "custom");

    double eval(double x) const;
    double operator()(double x) const { return eval(x); }

    /// Analytic sup |f'|. Throws ErrorKind::model ("unbounded component") for
    /// a custom function without a declared constant.
    double lipschitz_constant() const;

    ComponentKind kind() const noexcept { return kind_; }
    double coefficient() const noexcept { return coef_; }
    bool is_zero() const noexcept { return kind_ == ComponentKind::zero; }
    bool serializable() const noexcept { return kind_ != ComponentKind::custom; }

    /// Config-file token: "f1".."f5", "zero", "linear:<a>" or the custom name.
    std::string token() const;
    static ComponentFunction parse(const std::string& token);

private:
    explicit ComponentFunction(ComponentKind kind) : kind_(kind) {}

    ComponentKind kind_ = ComponentKind::zero;
    double coef_ = 0.0;
    std::shared_ptr<const std::function<double(double)>> custom_;
    std::optional<double> custom_lipschitz_;
    std::string custom_name_;
};

}  // namespace savar
