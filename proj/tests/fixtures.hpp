#pragma once

// Published five-state transition matrices (percent rows) and the limit
// distributions reported alongside them, used for replay checks.

#include <vector>

namespace fixtures {

inline std::vector<std::vector<double>> period1_percent() {
  return {
      {56.51, 24.44, 11.73, 4.11, 3.69},
      {8.44, 65.46, 3.62, 7.98, 14.51},
      {30.19, 43.01, 18.00, 7.19, 1.61},
      {3.74, 28.14, 2.29, 50.76, 15.08},
      {3.75, 7.92, 1.21, 5.92, 81.21},
  };
}

inline std::vector<std::vector<double>> period2_percent() {
  return {
      {57.67, 26.77, 8.35, 3.97, 3.23},
      {5.08, 67.66, 2.15, 9.55, 15.57},
      {19.85, 52.73, 13.18, 7.51, 6.74},
      {2.79, 29.44, 1.23, 46.81, 19.74},
      {2.34, 13.98, 0.96, 6.47, 76.26},
  };
}

inline std::vector<double> period1_limit() { return {0.14, 0.33, 0.04, 0.12, 0.37}; }
inline std::vector<double> period2_limit() { return {0.08, 0.34, 0.02, 0.13, 0.42}; }

}  // namespace fixtures
