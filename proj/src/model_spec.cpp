#include "mapflux/model_spec.hpp"

#include <cmath>
#include <numbers>

#include "mapflux/errors.hpp"

namespace mapflux {

RootSystem::RootSystem(RootKind kind) : kind_(kind) {
  switch (kind) {
    case RootKind::A1:
      roots_ = {{1.0, -1.0}};
      break;
    case RootKind::B2:
      roots_ = {{1.0, -1.0}, {1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}};
      break;
    case RootKind::C2:
      roots_ = {{1.0, -1.0}, {1.0, 1.0}, {2.0, 0.0}, {0.0, 2.0}};
      break;
    case RootKind::D2:
      roots_ = {{1.0, -1.0}, {1.0, 1.0}};
      break;
  }
}

std::array<double, 2> RootSystem::arc() const {
  constexpr double pi = std::numbers::pi;
  switch (kind_) {
    case RootKind::A1:
      return {-3.0 * pi / 4.0, pi / 4.0};
    case RootKind::B2:
    case RootKind::C2:
      return {0.0, pi / 4.0};
    case RootKind::D2:
      return {-pi / 4.0, pi / 4.0};
  }
  return {0.0, 0.0};
}

std::string RootSystem::name() const {
  switch (kind_) {
    case RootKind::A1:
      return "A1";
    case RootKind::B2:
      return "B2";
    case RootKind::C2:
      return "C2";
    case RootKind::D2:
      return "D2";
  }
  return "?";
}

RootSystem parse_root_system(const std::string& name) {
  if (name == "A1" || name == "a1") return RootSystem(RootKind::A1);
  if (name == "B2" || name == "b2") return RootSystem(RootKind::B2);
  if (name == "C2" || name == "c2") return RootSystem(RootKind::C2);
  if (name == "D2" || name == "d2") return RootSystem(RootKind::D2);
  throw ValidationError("unknown root system '" + name + "'");
}

void validate_oracle_spec(const OracleSpec& spec, int max_horizon) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(spec.flip_prob)) throw ValidationError("oracle flip_prob must lie in [0,1]");
  if (!prob(spec.up_prob[0]) || !prob(spec.up_prob[1])) {
    throw ValidationError("oracle up probabilities must lie in [0,1]");
  }
  if (!(spec.kill_prob >= 0.0 && spec.kill_prob < 1.0)) {
    throw ValidationError("oracle kill_prob must lie in [0,1)");
  }
  if (spec.horizon < 1) throw ValidationError("oracle horizon must be positive");
  if (spec.horizon > max_horizon) {
    throw ValidationError("oracle horizon " + std::to_string(spec.horizon) + " exceeds limit " +
                          std::to_string(max_horizon));
  }
}

void validate_model(const ModelSpec& model) {
  if (const auto* d = std::get_if<RadialDunkl>(&model)) {
    if (!(d->k >= 0.5) || !std::isfinite(d->k)) {
      throw ValidationError("radial Dunkl multiplicity k must be >= 1/2");
    }
  }
  if (const auto* o = std::get_if<DiscreteOracle>(&model)) {
    validate_oracle_spec(o->spec, 10'000'000);
  }
}

std::string model_name(const ModelSpec& model) {
  if (std::holds_alternative<FreeBessel2D>(model)) return "free-bessel";
  if (const auto* d = std::get_if<RadialDunkl>(&model)) {
    std::string n = d->root_system.name();
    n[0] = static_cast<char>(n[0] - 'A' + 'a');
    return "dunkl-" + n;
  }
  return "oracle";
}

ModelSpec parse_model(const std::string& name, double k) {
  if (name == "free-bessel" || name == "bessel") return FreeBessel2D{};
  if (name == "oracle") return DiscreteOracle{};
  if (name.rfind("dunkl-", 0) == 0) {
    RadialDunkl d{parse_root_system(name.substr(6)), k};
    validate_model(d);
    return d;
  }
  throw ValidationError("unknown model '" + name + "'");
}

std::array<double, 2> modulator_arc(const ModelSpec& model) {
  if (std::holds_alternative<FreeBessel2D>(model)) return {0.0, std::numbers::pi / 2.0};
  if (const auto* d = std::get_if<RadialDunkl>(&model)) return d->root_system.arc();
  // the two oracle states sit at angles 0 and pi/2
  return {0.0, std::numbers::pi / 2.0};
}

}  // namespace mapflux
