#include "qude/models.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace qude {

const char* to_string(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::StructurePreserving: return "sp";
    case AnsatzKind::Affine: return "affine";
    case AnsatzKind::Nonlinear: return "nonlinear";
  }
  return "?";
}

AnsatzKind parse_ansatz_kind(const std::string& s) {
  if (s == "sp" || s == "structure-preserving") return AnsatzKind::StructurePreserving;
  if (s == "affine") return AnsatzKind::Affine;
  if (s == "nonlinear") return AnsatzKind::Nonlinear;
  fail(ErrorCode::UnsupportedAnsatz, "unknown ansatz '" + s + "' (expected sp|affine|nonlinear)");
}

const char* to_string(GammaMode mode) {
  return mode == GammaMode::Squared ? "squared" : "signed";
}

GammaMode parse_gamma_mode(const std::string& s) {
  if (s == "squared") return GammaMode::Squared;
  if (s == "signed") return GammaMode::Signed;
  fail(ErrorCode::InvalidArgument, "unknown gamma mode '" + s + "' (expected squared|signed)");
}

StructurePreservingSource StructurePreservingSource::zero(int n, GammaMode mode) {
  StructurePreservingSource s;
  s.basis = gell_mann_basis(n);
  s.gamma_mode = mode;
  const auto identity = ComplexMatrix::identity(n);
  for (const auto& e : s.basis.elements) s.shifted.push_back(e - e(0, 0) * identity);
  s.alpha.assign(s.basis.size(), 0.0);
  s.gamma_raw.assign(s.basis.size(), 0.0);
  return s;
}

StructurePreservingSource StructurePreservingSource::from_physical(
    std::span<const double> alpha_khz, std::span<const double> gamma_inv_us, GammaMode mode) {
  const std::size_t k = alpha_khz.size();
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(k + 1))));
  if (n * n != static_cast<int>(k + 1) || gamma_inv_us.size() != k) {
    fail(ErrorCode::InvalidArgument, "from_physical: expected N^2-1 alpha and gamma values");
  }
  auto s = zero(n, mode);
  for (std::size_t j = 0; j < k; ++j) {
    s.alpha[j] = khz_to_rad_per_us(alpha_khz[j]);
    const double g = std::isinf(gamma_inv_us[j]) ? 0.0 : 1.0 / gamma_inv_us[j];
    if (mode == GammaMode::Squared) {
      if (g < 0.0) fail(ErrorCode::UnphysicalRate, "from_physical: negative rate in squared mode");
      s.gamma_raw[j] = std::sqrt(g);
    } else {
      s.gamma_raw[j] = g;
    }
  }
  return s;
}

NetworkSource NetworkSource::zero(int n, int layer_count, Activation act) {
  if (layer_count < 1) fail(ErrorCode::InvalidArgument, "NetworkSource: need at least one layer");
  NetworkSource s;
  s.basis = hermitian_basis(n);
  s.activation = act;
  const int width = n * n;
  for (int l = 0; l < layer_count; ++l) {
    DenseLayer layer;
    layer.inputs = width;
    layer.outputs = width;
    layer.weights.assign(static_cast<std::size_t>(width * width), 0.0);
    layer.bias.assign(static_cast<std::size_t>(width), 0.0);
    s.layers.push_back(std::move(layer));
  }
  return s;
}

NetworkSource NetworkSource::initialized(int n, int layer_count, Activation act,
                                         std::uint64_t seed, double scale) {
  auto s = zero(n, layer_count, act);
  std::mt19937_64 rng(seed);
  for (auto& layer : s.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : layer.weights) w = u(rng) * scale;
  }
  return s;
}

AnsatzKind ansatz_of(const SourceModel& src) {
  if (std::holds_alternative<StructurePreservingSource>(src)) return AnsatzKind::StructurePreserving;
  return std::get<NetworkSource>(src).activation == Activation::Identity ? AnsatzKind::Affine
                                                                         : AnsatzKind::Nonlinear;
}

int source_dim(const SourceModel& src) {
  return std::visit([](const auto& s) { return s.dim(); }, src);
}

SourceModel make_source(AnsatzKind kind, int n, const SourceOptions& opts) {
  switch (kind) {
    case AnsatzKind::StructurePreserving: {
      auto s = StructurePreservingSource::zero(n, opts.gamma_mode);
      for (double& r : s.gamma_raw) r = opts.gamma_raw_init;
      return s;
    }
    case AnsatzKind::Affine:
      return NetworkSource::initialized(n, opts.layers > 0 ? opts.layers : 1, Activation::Identity,
                                        opts.seed);
    case AnsatzKind::Nonlinear:
      return NetworkSource::initialized(n, opts.layers > 0 ? opts.layers : 3, Activation::Tanh,
                                        opts.seed);
  }
  fail(ErrorCode::UnsupportedAnsatz, "make_source: unknown ansatz");
}

ComplexMatrix sp_hermitian(const StructurePreservingSource& src) {
  ComplexMatrix h(src.dim());
  for (std::size_t j = 0; j < src.channels(); ++j) h.add_scaled(src.shifted[j], src.alpha[j]);
  return h;
}

ComplexMatrix dissipator(const ComplexMatrix& jump, const ComplexMatrix& rho) {
  const ComplexMatrix jd = jump.adjoint();
  ComplexMatrix out = jump * rho * jd;
  out.add_scaled(anticommutator(jd * jump, rho), -0.5);
  return out;
}

ComplexMatrix sp_dissipator(const StructurePreservingSource& src, const ComplexMatrix& rho) {
  ComplexMatrix out(src.dim());
  for (std::size_t j = 0; j < src.channels(); ++j) {
    const double g = src.gamma(j);
    if (g != 0.0) out.add_scaled(dissipator(src.basis.uppers[j], rho), g);
  }
  return out;
}

void sp_pullback_params(const StructurePreservingSource& src, const ComplexMatrix& rho,
                        const ComplexMatrix& mu, std::span<double> grad) {
  const std::size_t k = src.channels();
  const cplx minus_i(0.0, -1.0);
  for (std::size_t j = 0; j < k; ++j) {
    grad[j] += real_inner(mu, minus_i * commutator(src.shifted[j], rho));
    grad[k + j] += src.gamma_slope(j) * real_inner(mu, dissipator(src.basis.uppers[j], rho));
  }
}

EffectiveTimes effective_times(const DeviceModel& dev, const StructurePreservingSource& src) {
  if (src.dim() != 2) {
    fail(ErrorCode::InvalidDimension, "effective_times: defined for single qubits (N = 2) only");
  }
  const bool lindblad = dev.base == BaseKind::Lindblad;
  const double rate1 = (lindblad ? dev.tau1() : 0.0) + src.gamma(0) + src.gamma(1);
  const double rate2 = (lindblad ? dev.tau2() : 0.0) + 4.0 * src.gamma(2);
  if (!(rate1 > 0.0) || !(rate2 > 0.0)) {
    fail(ErrorCode::UnphysicalRate, "effective_times: non-positive effective decoherence rate");
  }
  auto inv = [](double g) { return g == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / g; };
  return EffectiveTimes{1.0 / rate1, 1.0 / rate2, {inv(src.gamma(0)), inv(src.gamma(2))}};
}

namespace {

void require_net_dim(const NetworkSource& src, const ComplexMatrix& rho) {
  if (rho.dim() != src.dim()) {
    fail(ErrorCode::InvalidArgument, "network source: state dimension " + std::to_string(rho.dim()) +
                                         " does not match basis dimension " +
                                         std::to_string(src.dim()));
  }
}

constexpr int kMaxWidth = kMaxDim * kMaxDim;
using Activations = std::array<double, kMaxWidth>;

// z = W x + b
void affine(const DenseLayer& layer, const double* x, double* z) {
  for (int o = 0; o < layer.outputs; ++o) {
    double acc = layer.bias[static_cast<std::size_t>(o)];
    const double* row = layer.weights.data() + static_cast<std::ptrdiff_t>(o) * layer.inputs;
    for (int i = 0; i < layer.inputs; ++i) acc += row[i] * x[i];
    z[o] = acc;
  }
}

}  // namespace

ComplexMatrix net_forward(const NetworkSource& src, const ComplexMatrix& rho) {
  require_net_dim(src, rho);
  Activations x{}, z{};
  expand_into(rho, src.basis, std::span<double>(x.data(), src.basis.size()));
  const std::size_t last = src.layers.size() - 1;
  for (std::size_t l = 0; l < src.layers.size(); ++l) {
    const auto& layer = src.layers[l];
    affine(layer, x.data(), z.data());
    for (int o = 0; o < layer.outputs; ++o)
      x[static_cast<std::size_t>(o)] =
          (l == last || src.activation == Activation::Identity) ? z[static_cast<std::size_t>(o)]
                                                                : std::tanh(z[static_cast<std::size_t>(o)]);
  }
  return reconstruct(std::span<const double>(x.data(), src.basis.size()), src.basis);
}

ComplexMatrix net_pullback(const NetworkSource& src, const ComplexMatrix& rho,
                           const ComplexMatrix& mu, std::span<double> grad) {
  require_net_dim(src, rho);
  const std::size_t depth = src.layers.size();
  const std::size_t width = src.basis.size();
  // inputs[l] feeds layer l; outs[l] is the activated output of layer l.
  std::array<Activations, 8> inputs_small{};
  std::vector<Activations> inputs_big;
  Activations* inputs = inputs_small.data();
  if (depth + 1 > inputs_small.size()) {
    inputs_big.resize(depth + 1);
    inputs = inputs_big.data();
  }
  expand_into(rho, src.basis, std::span<double>(inputs[0].data(), width));
  const std::size_t last = depth - 1;
  const bool nonlinear = src.activation == Activation::Tanh;
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& layer = src.layers[l];
    affine(layer, inputs[l].data(), inputs[l + 1].data());
    if (nonlinear && l != last)
      for (int o = 0; o < layer.outputs; ++o)
        inputs[l + 1][static_cast<std::size_t>(o)] = std::tanh(inputs[l + 1][static_cast<std::size_t>(o)]);
  }

  // d/d(output coefficient i) of <mu, sum_i c_i H_i>
  Activations g{};
  for (std::size_t i = 0; i < width; ++i) g[i] = real_inner(mu, src.basis.elements[i]);

  // parameters are layer-major; walk the offset back from the end
  std::size_t off = 0;
  for (const auto& layer : src.layers) off += layer.weights.size() + layer.bias.size();

  for (std::size_t l = depth; l-- > 0;) {
    const auto& layer = src.layers[l];
    Activations dz{};
    for (int o = 0; o < layer.outputs; ++o) {
      const auto so = static_cast<std::size_t>(o);
      if (nonlinear && l != last) {
        const double y = inputs[l + 1][so];
        dz[so] = g[so] * (1.0 - y * y);
      } else {
        dz[so] = g[so];
      }
    }
    off -= layer.weights.size() + layer.bias.size();
    double* gw = grad.data() + off;
    double* gb = gw + layer.weights.size();
    const double* x = inputs[l].data();
    for (int o = 0; o < layer.outputs; ++o) {
      const double d = dz[static_cast<std::size_t>(o)];
      for (int i = 0; i < layer.inputs; ++i) gw[o * layer.inputs + i] += d * x[i];
      gb[o] += d;
    }
    Activations gx{};
    for (int o = 0; o < layer.outputs; ++o) {
      const double d = dz[static_cast<std::size_t>(o)];
      const double* row = layer.weights.data() + static_cast<std::ptrdiff_t>(o) * layer.inputs;
      for (int i = 0; i < layer.inputs; ++i) gx[static_cast<std::size_t>(i)] += row[i] * d;
    }
    g = gx;
  }

  // expand() is c_i = <H_i, rho> / gram_i, so its pullback is sum_i g_i H_i / gram_i.
  Activations scaled{};
  for (std::size_t i = 0; i < width; ++i) scaled[i] = g[i] / src.basis.gram_norms[i];
  return reconstruct(std::span<const double>(scaled.data(), width), src.basis);
}

std::size_t param_count(const SourceModel& src) {
  if (const auto* sp = std::get_if<StructurePreservingSource>(&src)) return 2 * sp->channels();
  std::size_t n = 0;
  for (const auto& layer : std::get<NetworkSource>(src).layers) n += layer.weights.size() + layer.bias.size();
  return n;
}

std::vector<double> pack_params(const SourceModel& src) {
  std::vector<double> theta;
  theta.reserve(param_count(src));
  if (const auto* sp = std::get_if<StructurePreservingSource>(&src)) {
    theta.insert(theta.end(), sp->alpha.begin(), sp->alpha.end());
    theta.insert(theta.end(), sp->gamma_raw.begin(), sp->gamma_raw.end());
    return theta;
  }
  for (const auto& layer : std::get<NetworkSource>(src).layers) {
    theta.insert(theta.end(), layer.weights.begin(), layer.weights.end());
    theta.insert(theta.end(), layer.bias.begin(), layer.bias.end());
  }
  return theta;
}

SourceModel unpack_params(const SourceModel& shape, std::span<const double> theta) {
  if (theta.size() != param_count(shape)) {
    fail(ErrorCode::InvalidArgument, "unpack_params: expected " + std::to_string(param_count(shape)) +
                                         " parameters, got " + std::to_string(theta.size()));
  }
  SourceModel out = shape;
  auto it = theta.begin();
  if (auto* sp = std::get_if<StructurePreservingSource>(&out)) {
    std::copy_n(it, sp->channels(), sp->alpha.begin());
    std::copy_n(it + static_cast<std::ptrdiff_t>(sp->channels()), sp->channels(), sp->gamma_raw.begin());
    return out;
  }
  for (auto& layer : std::get<NetworkSource>(out).layers) {
    std::copy_n(it, layer.weights.size(), layer.weights.begin());
    it += static_cast<std::ptrdiff_t>(layer.weights.size());
    std::copy_n(it, layer.bias.size(), layer.bias.begin());
    it += static_cast<std::ptrdiff_t>(layer.bias.size());
  }
  return out;
}

}  // namespace qude
