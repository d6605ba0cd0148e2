#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace glt_stokes {

enum class ViscosityKind { constant, group2, group3, example1, custom };

struct ViscosityField {
    ViscosityKind kind = ViscosityKind::constant;
    double value = 1.0;                          // constant
    double gamma = 1.0;                          // group3
    double mu0 = 1.0, mu1 = 1.0, w = 0.1, delta = 0.0;  // example1
    std::function<double(double, double)> fn;    // custom
    double custom_inf = 0.0, custom_sup = 0.0;

    double operator()(double x, double y) const {
        switch (kind) {
        case ViscosityKind::constant: return value;
        case ViscosityKind::group2: return x * y + std::exp(x + y);
        case ViscosityKind::group3:
            return (x <= 0.5 && y <= 0.5) ? gamma : 1.0 + x + y;
        case ViscosityKind::example1: {
            // strip profile on (-1,1)^2, reached through X = 2x - 1
            double X = std::abs(2.0 * x - 1.0);
            if (X < w) return mu1;
            if (X > w + delta || delta == 0.0) return mu0;
            return mu0 + (mu1 - mu0) * (w + delta - X) / delta;
        }
        case ViscosityKind::custom: return fn(x, y);
        }
        return value;
    }

    double essinf() const {
        switch (kind) {
        case ViscosityKind::constant: return value;
        case ViscosityKind::group2: return 1.0;
        case ViscosityKind::group3: return std::min(gamma, 1.5);
        case ViscosityKind::example1: return std::min(mu0, mu1);
        case ViscosityKind::custom: return custom_inf;
        }
        return value;
    }

    double esssup() const {
        switch (kind) {
        case ViscosityKind::constant: return value;
        case ViscosityKind::group2: return 1.0 + std::exp(2.0);
        case ViscosityKind::group3: return std::max(gamma, 3.0);
        case ViscosityKind::example1: return std::max(mu0, mu1);
        case ViscosityKind::custom: return custom_sup;
        }
        return value;
    }

    std::string describe() const {
        switch (kind) {
        case ViscosityKind::constant: return "constant(" + std::to_string(value) + ")";
        case ViscosityKind::group2: return "xy+exp(x+y)";
        case ViscosityKind::group3: return "group3(gamma=" + std::to_string(gamma) + ")";
        case ViscosityKind::example1:
            return "strip(mu0=" + std::to_string(mu0) + ",mu1=" + std::to_string(mu1) +
                   ",w=" + std::to_string(w) + ",delta=" + std::to_string(delta) + ")";
        case ViscosityKind::custom: return "custom";
        }
        return "";
    }
};

inline ViscosityField constant_viscosity(double c = 1.0) {
    if (!(c > 0)) throw std::invalid_argument("viscosity must be positive");
    ViscosityField f;
    f.value = c;
    return f;
}

inline ViscosityField group2_viscosity() {
    ViscosityField f;
    f.kind = ViscosityKind::group2;
    return f;
}

inline ViscosityField group3_viscosity(double gamma) {
    if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
    ViscosityField f;
    f.kind = ViscosityKind::group3;
    f.gamma = gamma;
    return f;
}

inline ViscosityField strip_viscosity(double mu0, double mu1, double w, double delta) {
    if (!(mu0 > 0 && mu1 > 0 && w > 0 && delta >= 0))
        throw std::invalid_argument("strip viscosity needs mu0, mu1, w > 0 and delta >= 0");
    ViscosityField f;
    f.kind = ViscosityKind::example1;
    f.mu0 = mu0;
    f.mu1 = mu1;
    f.w = w;
    f.delta = delta;
    return f;
}

// group 1 -> constant 1, group 2 -> xy + e^{x+y}, group 3 -> piecewise with gamma
inline ViscosityField group_viscosity(int group, double gamma = 1.0) {
    switch (group) {
    case 1: return constant_viscosity(1.0);
    case 2: return group2_viscosity();
    case 3: return group3_viscosity(gamma);
    }
    throw std::invalid_argument("group must be 1, 2 or 3");
}

}  // namespace glt_stokes
