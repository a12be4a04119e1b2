#include "savar/component.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "savar/error.hpp"

namespace savar {

ComponentFunction ComponentFunction::linear(double coefficient) {
    if (!std::isfinite(coefficient)) fail_validation("linear coefficient must be finite");
    ComponentFunction f(ComponentKind::linear_coef);
    f.coef_ = coefficient;
    return f;
}

ComponentFunction ComponentFunction::benchmark(int index) {
    switch (index) {
        case 1: return f1();
        case 2: return f2();
        case 3: return f3();
        case 4: return f4();
        case 5: return f5();
        default: fail_validation("benchmark component index must be in 1..5");
    }
}

ComponentFunction ComponentFunction::custom(std::function<double(double)> fn,
                                            std::optional<double> lipschitz, std::string name) {
    if (!fn) fail_validation("custom component needs a callable");
    if (lipschitz && !(*lipschitz >= 0.0 && std::isfinite(*lipschitz)))
        fail_validation("declared Lipschitz constant must be finite and >= 0");
    ComponentFunction f(ComponentKind::custom);
    f.custom_ = std::make_shared<const std::function<double(double)>>(std::move(fn));
    f.custom_lipschitz_ = lipschitz;
    f.custom_name_ = std::move(name);
    return f;
}

double ComponentFunction::eval(double x) const {
    switch (kind_) {
        case ComponentKind::f1_linear: return 0.2 * x;
        case ComponentKind::f2_sine: return -0.15 * std::sin(1.5 * x);
        case ComponentKind::f3_gauss_cdf:
            return -0.5 * 0.5 * std::erfc(-(x - 0.5) * std::numbers::sqrt2 * 0.5);
        case ComponentKind::f4_gauss_bump: return 0.2 * x * std::exp(-0.5 * x * x);
        case ComponentKind::f5_log_abs: return 0.15 * std::log(std::abs(x) + 2.0);
        case ComponentKind::zero: return 0.0;
        case ComponentKind::linear_coef: return coef_ * x;
        case ComponentKind::custom: return (*custom_)(x);
    }
    return 0.0;
}

double ComponentFunction::lipschitz_constant() const {
    switch (kind_) {
        case ComponentKind::f1_linear: return 0.2;
        case ComponentKind::f2_sine: return 0.15 * 1.5;
        // sup of the normal density, attained at x = 0.5
        case ComponentKind::f3_gauss_cdf: return 0.5 * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
        // d/dx x e^{-x^2/2} = (1 - x^2) e^{-x^2/2}, largest in magnitude at 0
        case ComponentKind::f4_gauss_bump: return 0.2;
        case ComponentKind::f5_log_abs: return 0.15 / 2.0;
        case ComponentKind::zero: return 0.0;
        case ComponentKind::linear_coef: return std::abs(coef_);
        case ComponentKind::custom:
            if (!custom_lipschitz_) fail_model("unbounded component: " + custom_name_);
            return *custom_lipschitz_;
    }
    return 0.0;
}

std::string ComponentFunction::token() const {
    switch (kind_) {
        case ComponentKind::f1_linear: return "f1";
        case ComponentKind::f2_sine: return "f2";
        case ComponentKind::f3_gauss_cdf: return "f3";
        case ComponentKind::f4_gauss_bump: return "f4";
        case ComponentKind::f5_log_abs: return "f5";
        case ComponentKind::zero: return "zero";
        case ComponentKind::linear_coef: {
            char buf[64];
            auto res = std::to_chars(buf, buf + sizeof buf, coef_);
            return "linear:" + std::string(buf, res.ptr);
        }
        case ComponentKind::custom: return custom_name_;
    }
    return "zero";
}

ComponentFunction ComponentFunction::parse(const std::string& token) {
    if (token == "f1") return f1();
    if (token == "f2") return f2();
    if (token == "f3") return f3();
    if (token == "f4") return f4();
    if (token == "f5") return f5();
    if (token == "zero") return zero();
    if (token.rfind("linear:", 0) == 0) {
        const std::string num = token.substr(7);
        double a = 0.0;
        auto res = std::from_chars(num.data(), num.data() + num.size(), a);
        if (res.ec != std::errc() || res.ptr != num.data() + num.size())
            fail_validation("bad linear coefficient in component token '" + token + "'");
        return linear(a);
    }
    fail_validation("unknown component token '" + token + "'");
}

}  // namespace savar
