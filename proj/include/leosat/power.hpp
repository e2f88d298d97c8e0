#pragma once

#include <string>

#include "leosat/config.hpp"
#include "leosat/types.hpp"

namespace leosat {

enum class Architecture { FullyDigital, FullyConnected, PartiallyConnected };

std::string to_string(Architecture arch);

/// Parses "fully_digital" / "fully_connected" / "partially_connected".
Architecture architecture_from_string(const std::string& s);

/// Static transmitter draw in Watts for the given architecture.
///
/// Fully connected:      N_t M_t P_ps(bits) + M_t P_rfc + P_lo + P_bb
/// Partially connected:  N_t     P_ps(bits) + M_t P_rfc + P_lo + P_bb
/// Fully digital:        N_t P_rfc + P_lo + P_bb   (m_rf and bits ignored)
///
/// `resolution_bits` uses 0 for continuous phase shifters.
double transmit_power_static(Architecture arch, int m_rf, int resolution_bits,
                             const PowerModel& pm, int n_t);

/// Radiated power sum_k ||b_k||^2 of a precoding matrix.
double radiated_power(const Eigen::Ref<const CMat>& b);

/// Total consumed power xi * sum_k ||b_k||^2 + P_static, Watts.
double total_power(const Eigen::Ref<const CMat>& b, double xi, double p_static_w);

}  // namespace leosat
