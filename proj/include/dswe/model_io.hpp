#ifndef DSWE_MODEL_IO_HPP
#define DSWE_MODEL_IO_HPP

#include <string>
#include <variant>

#include "dswe/cnn.hpp"
#include "dswe/random_forest.hpp"
#include "dswe/svm.hpp"

namespace dswe {

using ModelArtifact = std::variant<SvmModel, RfModel, CnnModel>;

// Text artifact, header "DSWE-MODEL v1 <svm|rf|cnn>", full-precision
// decimal floats; a loaded model reproduces identical predictions.
void save_model(const ModelArtifact& model, const std::string& path);
ModelArtifact load_model(const std::string& path);

std::string model_kind(const ModelArtifact& model);

}  // namespace dswe

#endif  // DSWE_MODEL_IO_HPP
