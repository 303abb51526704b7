#pragma once

#include <array>

namespace vslab {

struct QReference {
  double x;
  double q;
};

/// Q(x) at 40-digit precision (mpmath), rounded to double.
inline constexpr std::array<QReference, 9> kQReference{{
    {-8.0, 0.9999999999999993779},
    {-4.0, 0.99996832875816688008},
    {-1.0, 0.84134474606854294859},
    {0.0, 0.5},
    {0.5, 0.30853753872598689636},
    {1.0, 0.15865525393145705141},
    {2.0, 0.0227501319481792072},
    {4.0, 0.000031671241833119921254},
    {8.0, 6.2209605742717841235e-16},
}};

}  // namespace vslab
