#include "forge/config.hpp"

#include <cstdlib>

namespace cocycle::forge {

CircleRotation parse_alpha(const std::string& spec, bool* float_warning) {
  if (float_warning) *float_warning = false;
  if (spec == "golden") return CircleRotation::golden();
  const auto slash = spec.find('/');
  try {
    if (slash != std::string::npos) {
      const long long p = std::stoll(spec.substr(0, slash));
      const long long q = std::stoll(spec.substr(slash + 1));
      return CircleRotation::from_rational(p, q);
    }
    const double a = std::stod(spec);
    if (float_warning) *float_warning = true;
    return CircleRotation::from_irrational(a);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse rotation constant '" + spec +
                      "' (expected p/q, 'golden', or a decimal in [0,1))");
  }
}

CircleRotation RunConfig::alpha() const { return parse_alpha(alpha_spec, nullptr); }

OrderedJson RunConfig::to_json() const {
  OrderedJson j;
  j["command"] = command;
  j["cocycle"] = cocycle;
  j["lambda"] = lambda;
  j["k"] = winding_k;
  j["c"] = sine_c;
  j["dim"] = dim;
  j["alpha"] = alpha_spec;
  j["alpha_float_warning"] = alpha_float_warning;
  j["convention"] = convention;
  j["embed"] = embed;
  j["n"] = n;
  j["grid"] = grid;
  j["n_max"] = n_max;
  j["step"] = step;
  j["seed"] = seed;
  j["threads"] = threads;
  j["svg"] = svg;
  return j;
}

AnyCocycle make_cocycle(const RunConfig& config) {
  const CircleRotation alpha = parse_alpha(config.alpha_spec, nullptr);
  const HermanConvention convention = config.convention == "cw"
                                          ? HermanConvention::Clockwise
                                          : HermanConvention::CounterClockwise;
  if (config.convention != "cw" && config.convention != "ccw") {
    throw ConfigError("unknown convention '" + config.convention + "' (ccw or cw)");
  }
  AnyCocycle out;
  const std::string& name = config.cocycle;
  if (name == "identity") {
    if (config.dim == 3) {
      out.three = identity_cocycle3(alpha);
    } else {
      out.two = identity_cocycle2(alpha);
    }
  } else if (name == "herman") {
    out.two = herman_cocycle(config.lambda, alpha, convention);
  } else if (name == "herman-doubled") {
    out.two = half_speed(herman_cocycle(config.lambda, alpha, convention));
  } else if (name == "herman-embedded-halfspeed") {
    out.three = block_embed(half_speed(herman_cocycle(config.lambda, alpha, convention)));
  } else if (name == "constant-diag") {
    if (config.dim == 3) {
      Mat3 d = Mat3::Identity();
      d(0, 0) = config.lambda;
      d(2, 2) = 1.0 / config.lambda;
      out.three = constant_cocycle<3>(d, alpha);
    } else {
      Mat2 d;
      d << config.lambda, 0.0, 0.0, 1.0 / config.lambda;
      out.two = constant_cocycle<2>(d, alpha);
    }
  } else if (name == "rotation-power") {
    out.two = rotation_power_cocycle(config.winding_k, alpha);
  } else if (name == "diagonal-sine") {
    out.two = diagonal_sine_cocycle(config.sine_c, alpha);
  } else if (name == "wiggle") {
    out.two = wiggle_cocycle(alpha);
  } else {
    throw ConfigError(
        "unknown cocycle '" + name +
        "' (identity, herman, herman-doubled, herman-embedded-halfspeed, "
        "constant-diag, rotation-power, diagonal-sine, wiggle)");
  }
  if (out.two) validate_cocycle(*out.two);
  if (out.three) validate_cocycle(*out.three);
  return out;
}

std::filesystem::path resolve_out_dir(const RunConfig& config) {
  if (!config.out_dir.empty()) return config.out_dir;
  if (const char* env = std::getenv("COCYCLE_FORGE_OUT"); env && *env) return env;
  return "out";
}

}  // namespace cocycle::forge
