/* Copyright 2026 The NPVI Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "npvi/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "npvi/error.hpp"

namespace npvi {

using nlohmann::json;

namespace {

json net_to_json(const GCNNet& net) {
  json layers = json::array();
  for (const auto& W : net.layers) {
    std::vector<double> data(W.data(), W.data() + W.size());
    layers.push_back({{"rows", W.rows()}, {"cols", W.cols()}, {"data", data}});
  }
  return layers;
}

GCNNet net_from_json(const json& j) {
  GCNNet net;
  for (const auto& layer : j) {
    const auto rows = layer.at("rows").get<Eigen::Index>();
    const auto cols = layer.at("cols").get<Eigen::Index>();
    const auto data = layer.at("data").get<std::vector<double>>();
    if (rows <= 0 || cols <= 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw InputError("checkpoint: network layer has inconsistent shape");
    }
    net.layers.emplace_back(Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols));
  }
  for (std::size_t l = 1; l < net.layers.size(); ++l) {
    if (net.layers[l].rows() != net.layers[l - 1].cols()) {
      throw InputError("checkpoint: network layer widths do not chain");
    }
  }
  return net;
}

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

void require(bool ok, const char* what) {
  if (!ok) throw InputError(std::string("checkpoint: ") + what);
}

}  // namespace

void save_checkpoint(const FittedModel& model, const std::filesystem::path& path) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["method"] = to_string(model.method);
  j["kernel"] = {{"length_scale", model.kernel.length_scale},
                 {"signal_variance", model.kernel.signal_variance},
                 {"jitter", model.kernel.jitter}};
  j["likelihood"] = {{"kind", to_string(model.likelihood.kind)},
                     {"sigma2", model.likelihood.sigma2}};
  j["dim"] = model.X.cols();
  j["X"] = std::vector<double>(model.X.data(), model.X.data() + model.X.size());
  j["y"] = model.y;
  j["graph"] = {{"k", model.graph.k}, {"parents", model.graph.parents},
                {"order", model.graph.order}};

  json b = json::array();
  for (const auto& bi : model.cond.b) b.push_back(std::vector<double>(bi.data(), bi.data() + bi.size()));
  j["conditionals"] = {{"b", b}, {"cond_var", model.cond.cond_var}};

  if (model.method == Method::npvi) {
    j["params"] = {{"k", model.params.k},
                   {"mu", model.params.mu},
                   {"log_diag", model.params.log_diag},
                   {"off_diag", model.params.off_diag}};
  } else {
    if (!model.weights) throw StateError("npvi-nn model has no network weights");
    j["weights"] = {{"mu_net", net_to_json(model.weights->mu_net)},
                    {"l_net", net_to_json(model.weights->l_net)}};
  }

  const auto& p = model.prep;
  j["preprocessing"] = {{"standardized", p.standardized},
                        {"feature_mean", p.feature_mean},
                        {"feature_scale", p.feature_scale},
                        {"target_offset", p.target_offset},
                        {"target_scale", p.target_scale},
                        {"clamp_floor", p.clamp_floor ? json(*p.clamp_floor) : json(nullptr)},
                        {"rows_rejected", p.rows_rejected},
                        {"rows_clamped", p.rows_clamped}};

  json log = json::array();
  for (const auto& r : model.log) {
    log.push_back({{"step", r.step},
                   {"seconds", r.seconds},
                   {"elbo_estimate", r.elbo_estimate},
                   {"val_nll", r.val_nll}});
  }
  j["log"] = log;

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw InputError("cannot write checkpoint " + tmp.string());
    out << j.dump() << '\n';
    if (!out) throw InputError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

FittedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("corrupt checkpoint " + path.string() + ": " + e.what());
  }

  FittedModel m;
  try {
    require(j.at("format").get<std::string>() == kCheckpointFormat, "not an npvi model file");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw InputError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
    }
    m.method = method_from_string(j.at("method").get<std::string>());
    const auto& kj = j.at("kernel");
    m.kernel.length_scale = kj.at("length_scale").get<double>();
    m.kernel.signal_variance = kj.at("signal_variance").get<double>();
    m.kernel.jitter = kj.at("jitter").get<double>();
    m.kernel.validate();
    const auto& lj = j.at("likelihood");
    m.likelihood.kind = likelihood_kind_from_string(lj.at("kind").get<std::string>());
    m.likelihood.sigma2 = lj.at("sigma2").get<double>();
    m.likelihood.validate();

    const auto dim = j.at("dim").get<Index>();
    const auto xs = j.at("X").get<std::vector<double>>();
    m.y = j.at("y").get<std::vector<double>>();
    const Index n = m.y.size();
    require(dim > 0 && n > 0 && xs.size() == n * dim, "training inputs have the wrong size");
    m.X = Eigen::Map<const PointSet>(xs.data(), static_cast<Eigen::Index>(n),
                                     static_cast<Eigen::Index>(dim));

    const auto& gj = j.at("graph");
    m.graph.k = gj.at("k").get<Index>();
    m.graph.parents = gj.at("parents").get<std::vector<std::vector<Index>>>();
    m.graph.order = gj.at("order").get<std::vector<Index>>();
    require(m.graph.size() == n, "graph size does not match the training data");
    m.graph.validate();

    const auto& cj = j.at("conditionals");
    const auto bs = cj.at("b").get<std::vector<std::vector<double>>>();
    m.cond.cond_var = cj.at("cond_var").get<std::vector<double>>();
    require(bs.size() == n && m.cond.cond_var.size() == n, "conditionals have the wrong size");
    m.cond.b.resize(n);
    for (Index i = 0; i < n; ++i) {
      require(bs[i].size() == m.graph.parents[i].size(), "conditional weights do not match the graph");
      require(m.cond.cond_var[i] > 0.0, "conditional variance is not positive");
      m.cond.b[i] = Eigen::Map<const Eigen::VectorXd>(bs[i].data(),
                                                      static_cast<Eigen::Index>(bs[i].size()));
    }

    if (m.method == Method::npvi) {
      const auto& pj = j.at("params");
      m.params.k = pj.at("k").get<Index>();
      m.params.mu = pj.at("mu").get<std::vector<double>>();
      m.params.log_diag = pj.at("log_diag").get<std::vector<double>>();
      m.params.off_diag = pj.at("off_diag").get<std::vector<double>>();
      require(m.params.k == m.graph.k && m.params.mu.size() == n && m.params.log_diag.size() == n &&
                  m.params.off_diag.size() == n * m.params.k,
              "variational parameters have the wrong size");
    } else {
      const auto& wj = j.at("weights");
      GCNWeights w{net_from_json(wj.at("mu_net")), net_from_json(wj.at("l_net"))};
      require(!w.mu_net.layers.empty() && !w.l_net.layers.empty(), "network has no layers");
      m.weights = std::move(w);
    }

    if (j.contains("preprocessing")) {
      const auto& pj = j.at("preprocessing");
      auto& p = m.prep;
      p.standardized = pj.at("standardized").get<bool>();
      p.feature_mean = pj.at("feature_mean").get<std::vector<double>>();
      p.feature_scale = pj.at("feature_scale").get<std::vector<double>>();
      p.target_offset = pj.at("target_offset").get<double>();
      p.target_scale = pj.at("target_scale").get<double>();
      if (!pj.at("clamp_floor").is_null()) p.clamp_floor = pj.at("clamp_floor").get<double>();
      p.rows_rejected = pj.at("rows_rejected").get<Index>();
      p.rows_clamped = pj.at("rows_clamped").get<Index>();
    }

    for (const auto& r : j.at("log")) {
      m.log.push_back({r.at("step").get<Index>(), r.at("seconds").get<double>(),
                       number_or_nan(r.at("elbo_estimate")), number_or_nan(r.at("val_nll"))});
    }
  } catch (const json::exception& e) {
    throw InputError("corrupt checkpoint " + path.string() + ": " + e.what());
  }

  m.prepare();
  return m;
}

}  // namespace npvi
