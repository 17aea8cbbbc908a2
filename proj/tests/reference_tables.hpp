#pragma once

// Reference per-household figures for nine households, columns tau = 0.07, 0.10, 0.15, passive:
// MAPE improvement over the never-adapt baseline (percent), total adaptation cost (EUR),
// and the printed trade-off score.

#include <array>

namespace reference {

using Row = std::array<double, 4>;

inline constexpr std::array<Row, 9> kImprovement = {{
    {27.74, 43.60, 50.91, 55.03},
    {0.49, 0.74, 13.58, 37.53},
    {1.29, 2.12, 10.28, 48.18},
    {0.00, 31.01, 41.46, 46.20},
    {0.00, 10.68, 11.00, 13.92},
    {0.00, 0.00, 17.28, 39.63},
    {27.52, 42.31, 52.64, 50.84},
    {1.64, 1.64, 11.13, 12.77},
    {13.07, 14.15, 16.55, 64.03},
}};

inline constexpr std::array<Row, 9> kCost = {{
    {7.53, 8.86, 9.88, 24.17},
    {7.44, 8.11, 11.02, 31.31},
    {4.56, 5.50, 6.50, 26.37},
    {0.00, 4.10, 4.91, 22.80},
    {0.00, 7.66, 9.89, 18.95},
    {0.00, 0.00, 2.52, 20.60},
    {5.96, 6.68, 8.45, 15.93},
    {9.42, 10.56, 12.56, 31.04},
    {7.27, 9.25, 10.47, 20.60},
}};

inline constexpr std::array<Row, 9> kTradeOff = {{
    {3.68, 4.92, 5.15, 2.28},
    {0.07, 0.09, 1.23, 1.2},
    {0.28, 0.39, 1.58, 1.83},
    {0.00, 7.57, 8.44, 2.03},
    {0.00, 1.39, 1.11, 0.73},
    {0.00, 0.00, 6.87, 1.92},
    {4.62, 6.34, 6.23, 3.19},
    {0.17, 0.16, 0.89, 0.41},
    {1.88, 1.53, 1.58, 3.11},
}};

inline constexpr std::array<const char*, 4> kColumns = {"tau=0.07", "tau=0.10", "tau=0.15", "passive"};

} // namespace reference
