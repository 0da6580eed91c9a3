#pragma once

#include <array>
#include <cstddef>

namespace roughlayer {

/// Gauss-Legendre points/weights on [0,1].
struct GaussPoint1D {
    double x;
    double w;
};

inline constexpr std::array<GaussPoint1D, 3> gauss3_unit = {{
    {0.11270166537925831, 0.27777777777777779},
    {0.50000000000000000, 0.44444444444444442},
    {0.88729833462074170, 0.27777777777777779},
}};

inline constexpr std::array<GaussPoint1D, 5> gauss5_unit = {{
    {0.046910077030668074, 0.11846344252809454},
    {0.230765344947158450, 0.23931433524968324},
    {0.500000000000000000, 0.28444444444444444},
    {0.769234655052841550, 0.23931433524968324},
    {0.953089922969331930, 0.11846344252809454},
}};

/// Quadrature point on the reference triangle (0,0)-(1,0)-(0,1),
/// weights summing to 1/2 (the reference area).
struct TriQuadPoint {
    double a;  // barycentric coordinate of vertex 1
    double b;  // barycentric coordinate of vertex 2
    double w;
};

/// Degree-2 exact rule (3 points).
inline constexpr std::array<TriQuadPoint, 3> tri_quad_deg2 = {{
    {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0},
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
}};

/// Degree-4 exact rule (6 points, Dunavant).
inline constexpr std::array<TriQuadPoint, 6> tri_quad_deg4 = {{
    {0.445948490915965, 0.445948490915965, 0.111690794839005},
    {0.445948490915965, 0.108103018168070, 0.111690794839005},
    {0.108103018168070, 0.445948490915965, 0.111690794839005},
    {0.091576213509771, 0.091576213509771, 0.054975871827661},
    {0.091576213509771, 0.816847572980459, 0.054975871827661},
    {0.816847572980459, 0.091576213509771, 0.054975871827661},
}};

}  // namespace roughlayer
