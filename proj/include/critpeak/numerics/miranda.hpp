#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "critpeak/errors.hpp"

namespace critpeak::numerics {

/// Axis-aligned box in R^k.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    void validate() const {
        if (lower.size() != upper.size()) throw InvalidArgument("Box: dimension mismatch");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i])) throw InvalidArgument("Box: lower must be < upper");
    }
    Eigen::Index dim() const { return lower.size(); }
    double width(Eigen::Index i) const { return upper[i] - lower[i]; }
    double max_width() const { return (upper - lower).maxCoeff(); }
    Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
};

/// Verdict when a component fails to change sign across its opposite faces.
struct NoSignChange {
    Eigen::Index component = -1;
};

using MirandaOutcome = std::variant<Box, NoSignChange>;

using MapFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

namespace detail {

// Sample points on the face x_i = value: face center, face corners, edge midpoints.
inline std::vector<Eigen::VectorXd> face_samples(const Box& box, Eigen::Index i, double value) {
    const Eigen::Index k = box.dim();
    std::vector<Eigen::VectorXd> pts;
    Eigen::VectorXd c = box.center();
    c[i] = value;
    pts.push_back(c);
    const Eigen::Index free = k - 1;
    if (free > 0 && free <= 6) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << free); ++mask) {
            Eigen::VectorXd p(k);
            std::size_t bit = 0;
            for (Eigen::Index j = 0; j < k; ++j) {
                if (j == i) {
                    p[j] = value;
                } else {
                    p[j] = (mask >> bit & 1u) ? box.upper[j] : box.lower[j];
                    ++bit;
                }
            }
            pts.push_back(p);
            pts.push_back(0.5 * (p + c));
        }
    }
    return pts;
}

// Sign of F_i on the face, or 0 when not of one sign over the samples.
inline int face_sign(const MapFn& F, const Box& box, Eigen::Index i, double value) {
    int sign = 0;
    for (const auto& p : face_samples(box, i, value)) {
        const double v = F(p)[i];
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s == 0) return 0;
        if (sign == 0) sign = s;
        if (s != sign) return 0;
    }
    return sign;
}

// Checks the Poincare-Miranda sign configuration (either orientation per component).
inline bool miranda_config(const MapFn& F, const Box& box, Eigen::Index* bad) {
    for (Eigen::Index i = 0; i < box.dim(); ++i) {
        const int lo = face_sign(F, box, i, box.lower[i]);
        const int hi = face_sign(F, box, i, box.upper[i]);
        if (lo == 0 || hi == 0 || lo == hi) {
            if (bad) *bad = i;
            return false;
        }
    }
    return true;
}

}  // namespace detail

/// Poincare-Miranda certified root localization.
/// Establishes that each F_i has constant opposite signs on the two faces
/// x_i = lower_i / upper_i (checked by face sampling), then bisects along
/// the longest edge while the configuration persists.
inline MirandaOutcome miranda_search(const MapFn& F, Box box, int refinement_depth) {
    box.validate();
    Eigen::Index bad = -1;
    if (!detail::miranda_config(F, box, &bad)) return NoSignChange{bad};
    const double target = std::pow(0.5, refinement_depth) * box.max_width();
    while (box.max_width() > target) {
        Eigen::Index j = 0;
        (box.upper - box.lower).maxCoeff(&j);
        bool advanced = false;
        // cut fractions: retry off-center when the root sits on the cut
        for (double frac : {0.5, 0.609375, 0.390625}) {
            const double mid = box.lower[j] + frac * (box.upper[j] - box.lower[j]);
            Box lo = box, hi = box;
            lo.upper[j] = mid;
            hi.lower[j] = mid;
            if (detail::miranda_config(F, lo, nullptr)) {
                box = lo;
                advanced = true;
                break;
            }
            if (detail::miranda_config(F, hi, nullptr)) {
                box = hi;
                advanced = true;
                break;
            }
        }
        if (!advanced) break;  // return the smallest certified box
    }
    return box;
}

}  // namespace critpeak::numerics
