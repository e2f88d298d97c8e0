#include "leosat/power.hpp"

namespace leosat {

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::FullyDigital: return "fully_digital";
    case Architecture::FullyConnected: return "fully_connected";
    case Architecture::PartiallyConnected: return "partially_connected";
  }
  return "unknown";
}

Architecture architecture_from_string(const std::string& s) {
  if (s == "fully_digital" || s == "digital") return Architecture::FullyDigital;
  if (s == "fully_connected" || s == "fully") return Architecture::FullyConnected;
  if (s == "partially_connected" || s == "partial") return Architecture::PartiallyConnected;
  throw ConfigError("unknown architecture: " + s);
}

double transmit_power_static(Architecture arch, int m_rf, int resolution_bits,
                             const PowerModel& pm, int n_t) {
  const double nt = static_cast<double>(n_t);
  const double mt = static_cast<double>(m_rf);
  double mw = 0.0;
  switch (arch) {
    case Architecture::FullyConnected:
      mw = nt * mt * pm.ps_mw(resolution_bits) + mt * pm.rfc_mw() + pm.p_lo_mw + pm.p_bb_mw;
      break;
    case Architecture::PartiallyConnected:
      mw = nt * pm.ps_mw(resolution_bits) + mt * pm.rfc_mw() + pm.p_lo_mw + pm.p_bb_mw;
      break;
    case Architecture::FullyDigital:
      mw = nt * pm.rfc_mw() + pm.p_lo_mw + pm.p_bb_mw;
      break;
  }
  return mw * 1.0e-3;
}

double radiated_power(const Eigen::Ref<const CMat>& b) { return b.squaredNorm(); }

double total_power(const Eigen::Ref<const CMat>& b, double xi, double p_static_w) {
  return xi * radiated_power(b) + p_static_w;
}

}  // namespace leosat
