#include "fxts/defaults.hpp"

#include <json.hpp>

namespace fxts::defaults {

namespace {

const nlohmann::json& block() {
  static const nlohmann::json j = nlohmann::json::parse(kProfilesJson);
  return j;
}

}  // namespace

Profile profile(const std::string& name) {
  const auto& profiles = block().at("profiles");
  if (!profiles.contains(name)) throw ParameterError("unknown defaults profile '" + name + "'");
  const auto& p = profiles.at(name);
  Profile out;
  const auto& f = p.at("fxts");
  out.fxts.c1 = f.at("c1").get<double>();
  out.fxts.c2 = f.at("c2").get<double>();
  out.fxts.p1 = f.at("p1").get<double>();
  out.fxts.p2 = f.at("p2").get<double>();
  out.fxts.grad_guard = f.at("grad_guard").get<double>();
  const auto& i = p.at("integrator");
  out.integrator.scheme = scheme_from_string(i.at("scheme").get<std::string>());
  out.integrator.step = i.at("step").get<double>();
  out.integrator.ascent_ratio = i.at("ascent_ratio").get<int>();
  out.integrator.max_steps = i.at("max_steps").get<std::size_t>();
  out.integrator.stop_grad_tol = i.at("stop_grad_tol").get<double>();
  if (i.contains("stop_dist_tol")) out.integrator.stop_dist_tol = i.at("stop_dist_tol").get<double>();
  out.integrator.record_every = i.at("record_every").get<std::size_t>();
  return out;
}

double compare_dist_tol() { return block().at("compare").at("dist_tol").get<double>(); }

Box pl_region() {
  const auto& b = block().at("estimate_pl").at("box");
  return Box{b.at(0).get<double>(), b.at(1).get<double>()};
}

std::size_t pl_samples() { return block().at("estimate_pl").at("n_samples").get<std::size_t>(); }

std::uint64_t pl_seed() { return block().at("estimate_pl").at("seed").get<std::uint64_t>(); }

}  // namespace fxts::defaults
