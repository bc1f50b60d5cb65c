#include <string>

#include "gridsur/surrogate/forest.hpp"
#include "gridsur/surrogate/knn.hpp"
#include "gridsur/surrogate/linear.hpp"
#include "gridsur/surrogate/mlp.hpp"
#include "gridsur/surrogate/model.hpp"

namespace gridsur {

using nlohmann::json;

void SurrogateModel::check_row(std::span<const double> x, std::span<double> out) const {
  if (static_cast<Index>(x.size()) != input_dim())
    throw std::invalid_argument("expected " + std::to_string(input_dim()) + " inputs, got " +
                                std::to_string(x.size()));
  if (static_cast<Index>(out.size()) != output_dim())
    throw std::invalid_argument("output buffer must hold " + std::to_string(output_dim()) + " values");
}

Matrix SurrogateModel::predict(const Matrix& x) const {
  if (x.cols() != input_dim())
    throw std::invalid_argument("expected " + std::to_string(input_dim()) + " input columns, got " +
                                std::to_string(x.cols()));
  return predict_batch(x);
}

Matrix SurrogateModel::predict_batch(const Matrix& x) const {
  RowMatrix in = x;
  RowMatrix out(x.rows(), output_dim());
  for (Index r = 0; r < x.rows(); ++r)
    predict_row({in.row(r).data(), static_cast<std::size_t>(in.cols())},
                {out.row(r).data(), static_cast<std::size_t>(out.cols())});
  return out;
}

SurrogatePtr fit_surrogate(Family family, const HyperParams& hp, const Matrix& x,
                           const Matrix& y, std::uint64_t seed) {
  check_family(family, hp);
  SurrogatePtr model;
  switch (family) {
    case Family::ReLr: model = fit_linear_ensemble(x, y, std::get<LinearParams>(hp)); break;
    case Family::RcLr: model = fit_linear_chain(x, y, std::get<LinearParams>(hp)); break;
    case Family::ReRf: model = fit_random_forest(x, y, std::get<ForestParams>(hp), seed); break;
    case Family::Knn: model = fit_knn(x, y, std::get<KnnParams>(hp)); break;
    case Family::Mlp: model = fit_mlp(x, y, std::get<MlpParams>(hp), seed); break;
  }
  model->meta.seed = seed;
  return model;
}

json serialize_model(const SurrogateModel& model) {
  return {{"format_version", kModelFormatVersion},
          {"family", to_string(model.family())},
          {"input_dim", model.input_dim()},
          {"output_dim", model.output_dim()},
          {"hyperparameters", to_json(model.hyper_params())},
          {"seed", model.meta.seed},
          {"fold", model.meta.fold},
          {"parameters", model.parameters_json()}};
}

SurrogatePtr deserialize_model(const json& blob) {
  const int version = blob.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    throw std::invalid_argument("unsupported model format version " + std::to_string(version));
  const Family family = parse_family(blob.at("family").get<std::string>());
  const HyperParams hp = hyper_params_from_json(family, blob.at("hyperparameters"));
  const json& p = blob.at("parameters");
  SurrogatePtr model;
  switch (family) {
    case Family::ReLr:
    case Family::RcLr: model = linear_from_json(family, std::get<LinearParams>(hp), p); break;
    case Family::ReRf: model = forest_from_json(std::get<ForestParams>(hp), p); break;
    case Family::Knn: model = knn_from_json(std::get<KnnParams>(hp), p); break;
    case Family::Mlp: model = mlp_from_json(std::get<MlpParams>(hp), p); break;
  }
  if (model->input_dim() != blob.at("input_dim").get<Index>() ||
      model->output_dim() != blob.at("output_dim").get<Index>())
    throw std::invalid_argument("model dimensions do not match the stored header");
  model->meta.seed = blob.at("seed").get<std::uint64_t>();
  model->meta.fold = blob.at("fold").get<int>();
  return model;
}

}  // namespace gridsur
