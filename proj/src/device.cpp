#include "qude/device.hpp"

#include <cmath>
#include <sstream>

namespace qude {

const char* to_string(BaseKind kind) {
  return kind == BaseKind::LvN ? "lvn" : "lindblad";
}

BaseKind parse_base_kind(const std::string& s) {
  if (s == "lvn" || s == "LvN") return BaseKind::LvN;
  if (s == "lindblad" || s == "Lindblad") return BaseKind::Lindblad;
  fail(ErrorCode::InvalidArgument, "unknown base model '" + s + "' (expected lvn|lindblad)");
}

void DeviceModel::validate() const {
  if (dim < 2 || dim > kMaxDim) {
    fail(ErrorCode::InvalidDimension, "DeviceModel: unsupported level count " + std::to_string(dim));
  }
  if (base == BaseKind::Lindblad && !(t1_us > 0.0 && t2_us > 0.0)) {
    fail(ErrorCode::InvalidConfiguration, "DeviceModel: T1 and T2 must be positive");
  }
}

DeviceModel DeviceModel::dev1(BaseKind base) {
  return DeviceModel{3.448, 3.448, 214.0, 32.0, base, 2};
}

DeviceModel DeviceModel::dev2(BaseKind base) {
  return DeviceModel{4.086, 4.086, 62.0, 6.0, base, 2};
}

long Experiment::sample_count() const {
  const double ratio = duration_us * 1000.0 / sample_dt_ns;
  return std::lround(ratio);
}

DensityMatrix Experiment::initial(int dim) const {
  if (initial_state) {
    if (initial_state->dim() != dim) {
      fail(ErrorCode::InvalidArgument, "Experiment " + id + ": initial state has wrong dimension");
    }
    return *initial_state;
  }
  return DensityMatrix::ground(dim);
}

void Experiment::validate() const {
  if (!(duration_us > 0.0) || !(sample_dt_ns > 0.0)) {
    fail(ErrorCode::InvalidConfiguration, "Experiment " + id + ": duration and sample_dt must be positive");
  }
  const double ratio = duration_us * 1000.0 / sample_dt_ns;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "Experiment " << id << ": duration " << duration_us << " us is not a multiple of "
       << sample_dt_ns << " ns";
    fail(ErrorCode::InvalidConfiguration, os.str());
  }
}

}  // namespace qude
