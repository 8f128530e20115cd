#include "vulnlearn/classifier.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "vulnlearn/serialize_util.hpp"

namespace vulnlearn {

Classifier Classifier::train(ModelKind kind,
                             const std::vector<std::vector<double>>& X,
                             const std::vector<int>& y,
                             const TrainSettings& settings) {
  Classifier c;
  switch (kind) {
    case ModelKind::RandomForest:
      c.impl_ = RandomForest::train(X, y, settings.rf);
      break;
    case ModelKind::Svm:
      c.impl_ = Svm::train(X, y, settings.svm);
      break;
    case ModelKind::ResNet:
      c.impl_ = ResNet::train(X, y, settings.resnet);
      break;
  }
  return c;
}

std::vector<Prediction> Classifier::predict(
    const std::vector<std::vector<double>>& X) const {
  return std::visit([&](const auto& model) { return model.predict(X); }, impl_);
}

ModelKind Classifier::kind() const {
  if (std::holds_alternative<RandomForest>(impl_)) return ModelKind::RandomForest;
  if (std::holds_alternative<Svm>(impl_)) return ModelKind::Svm;
  return ModelKind::ResNet;
}

int Classifier::feature_dim() const {
  return std::visit([](const auto& model) { return model.feature_dim(); }, impl_);
}

void Classifier::save(std::ostream& out) const {
  io::write_u32(out, 0x564c4d44);  // "VLMD"
  io::write_u32(out, static_cast<std::uint32_t>(kind()));
  std::visit([&](const auto& model) { model.save(out); }, impl_);
}

Classifier Classifier::load(std::istream& in) {
  if (io::read_u32(in) != 0x564c4d44)
    throw std::runtime_error("Classifier::load: bad magic");
  const auto kind = static_cast<ModelKind>(io::read_u32(in));
  Classifier c;
  switch (kind) {
    case ModelKind::RandomForest:
      c.impl_ = RandomForest::load(in);
      break;
    case ModelKind::Svm:
      c.impl_ = Svm::load(in);
      break;
    case ModelKind::ResNet:
      c.impl_ = ResNet::load(in);
      break;
    default:
      throw std::runtime_error("Classifier::load: unknown model kind");
  }
  return c;
}

}  // namespace vulnlearn
