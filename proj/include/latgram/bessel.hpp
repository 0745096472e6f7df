#pragma once

#include <span>
#include <vector>

// Modified Bessel functions of the first kind, integer order, real
// non-negative argument.
namespace latgram::bessel {

/// I_n(z). Negative orders fold onto |n|. Throws InvalidArgument for z < 0
/// and RangeError when the result overflows a double (use i_scaled).
double i(int n, double z);

/// e^{-z} I_n(z); lies in [0, 1] and never overflows.
double i_scaled(int n, double z);

/// log(e^{-z} I_n(z)), finite even where i_scaled underflows (z > 0 or n == 0).
double log_i_scaled(int n, double z);

/// e^{-z} I_k(z) for k = 0..n_max in one pass.
std::vector<double> i_scaled_sequence(int n_max, double z);

/// As above, writing n_max + 1 = out.size() values into out.
void i_scaled_sequence(double z, std::span<double> out);

}  // namespace latgram::bessel
