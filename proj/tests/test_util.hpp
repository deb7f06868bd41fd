#pragma once

#include <cmath>
#include <random>
#include <string>

#include <doctest.h>

namespace testutil {

inline bool rel_close(double x, double ref, double tol, double abs_floor = 0.0) {
    return std::abs(x - ref) <= std::max(tol * std::abs(ref), abs_floor);
}

inline double rel_err(double x, double ref) {
    return std::abs(x - ref) / std::max(std::abs(ref), 1e-300);
}

} // namespace testutil

#define CHECK_REL(x, ref, tol)                                                        \
    do {                                                                              \
        const double cr_x = (x);                                                      \
        const double cr_ref = (ref);                                                  \
        CHECK_MESSAGE(testutil::rel_close(cr_x, cr_ref, (tol)),                       \
                      "got " << cr_x << ", want " << cr_ref << " (rel err "           \
                             << testutil::rel_err(cr_x, cr_ref) << ", tol " << (tol)  \
                             << ")");                                                 \
    } while (0)
