#include "gridsur/surrogate/params.hpp"

#include <sstream>
#include <stdexcept>

namespace gridsur {

using nlohmann::json;

std::string_view to_string(Family f) {
  switch (f) {
    case Family::ReLr: return "re_lr";
    case Family::RcLr: return "rc_lr";
    case Family::ReRf: return "re_rf";
    case Family::Knn: return "knn";
    case Family::Mlp: return "mlp";
  }
  return "?";
}

std::string_view display_name(Family f) {
  switch (f) {
    case Family::ReLr: return "RE LR";
    case Family::RcLr: return "RC LR";
    case Family::ReRf: return "RE RF";
    case Family::Knn: return "k-NN";
    case Family::Mlp: return "ANN";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  for (Family f : {Family::ReLr, Family::RcLr, Family::ReRf, Family::Knn, Family::Mlp})
    if (s == to_string(f)) return f;
  throw std::invalid_argument("unknown model family '" + std::string(s) +
                              "' (expected re_lr, rc_lr, re_rf, knn or mlp)");
}

std::string_view to_string(Weighting w) {
  return w == Weighting::Uniform ? "uniform" : "inverse_distance";
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

Weighting parse_weighting(std::string_view s) {
  if (s == "uniform") return Weighting::Uniform;
  if (s == "inverse_distance") return Weighting::InverseDistance;
  throw std::invalid_argument("unknown weighting '" + std::string(s) + "'");
}

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

void check_family(Family f, const HyperParams& hp) {
  const bool ok = [&] {
    switch (f) {
      case Family::ReLr:
      case Family::RcLr: return std::holds_alternative<LinearParams>(hp);
      case Family::ReRf: return std::holds_alternative<ForestParams>(hp);
      case Family::Knn: return std::holds_alternative<KnnParams>(hp);
      case Family::Mlp: return std::holds_alternative<MlpParams>(hp);
    }
    return false;
  }();
  if (!ok)
    throw std::invalid_argument("hyperparameters do not match family " +
                                std::string(to_string(f)));
}

namespace {

struct ToJson {
  json operator()(const LinearParams& p) const {
    return {{"ridge", p.ridge}, {"drop_dependent", p.drop_dependent},
            {"chain_order", p.chain_order}};
  }
  json operator()(const ForestParams& p) const {
    return {{"mtry", p.mtry}, {"sample_size", p.sample_size}, {"replace", p.replace},
            {"nodesize", p.nodesize}, {"n_trees", p.n_trees}};
  }
  json operator()(const KnnParams& p) const {
    return {{"k", p.k}, {"weighting", to_string(p.weighting)}};
  }
  json operator()(const MlpParams& p) const {
    return {{"epochs", p.epochs},
            {"hidden_layers", p.hidden_layers},
            {"batch_size", p.batch_size},
            {"activation", to_string(p.activation)},
            {"dropout", p.dropout},
            {"task_specific_layers", p.task_specific_layers},
            {"head_width", p.head_width},
            {"learning_rate", p.learning_rate}};
  }
};

}  // namespace

json to_json(const HyperParams& hp) { return std::visit(ToJson{}, hp); }

HyperParams hyper_params_from_json(Family f, const json& j) {
  switch (f) {
    case Family::ReLr:
    case Family::RcLr: {
      LinearParams p;
      p.ridge = j.value("ridge", p.ridge);
      p.drop_dependent = j.value("drop_dependent", p.drop_dependent);
      p.chain_order = j.value("chain_order", p.chain_order);
      return p;
    }
    case Family::ReRf: {
      ForestParams p;
      p.mtry = j.value("mtry", p.mtry);
      p.sample_size = j.value("sample_size", p.sample_size);
      p.replace = j.value("replace", p.replace);
      p.nodesize = j.value("nodesize", p.nodesize);
      p.n_trees = j.value("n_trees", p.n_trees);
      return p;
    }
    case Family::Knn: {
      KnnParams p;
      p.k = j.value("k", p.k);
      if (j.contains("weighting")) p.weighting = parse_weighting(j.at("weighting").get<std::string>());
      return p;
    }
    case Family::Mlp: {
      MlpParams p;
      p.epochs = j.value("epochs", p.epochs);
      p.hidden_layers = j.value("hidden_layers", p.hidden_layers);
      p.batch_size = j.value("batch_size", p.batch_size);
      if (j.contains("activation"))
        p.activation = parse_activation(j.at("activation").get<std::string>());
      p.dropout = j.value("dropout", p.dropout);
      p.task_specific_layers = j.value("task_specific_layers", p.task_specific_layers);
      p.head_width = j.value("head_width", p.head_width);
      p.learning_rate = j.value("learning_rate", p.learning_rate);
      return p;
    }
  }
  throw std::invalid_argument("unknown family");
}

std::string describe(const HyperParams& hp) {
  json j = to_json(hp);
  if (std::holds_alternative<LinearParams>(hp) && std::get<LinearParams>(hp).chain_order.empty())
    j.erase("chain_order");
  std::ostringstream os;
  bool first = true;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!first) os << ' ';
    first = false;
    os << it.key() << '=' << (it->is_string() ? it->get<std::string>() : it->dump());
  }
  return os.str();
}

}  // namespace gridsur
