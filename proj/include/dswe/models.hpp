#ifndef DSWE_MODELS_HPP
#define DSWE_MODELS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dswe/features.hpp"

namespace dswe {

struct Prediction {
  std::string label;
  std::vector<std::string> classes;
  std::vector<double> scores;  // aligned with classes
};

// argmax with ties resolved to the lowest class index
inline std::size_t argmax_class(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

// Sorted unique labels; throws unless exactly two classes are present.
std::vector<std::string> binary_classes(const std::vector<std::string>& labels);

}  // namespace dswe

#endif  // DSWE_MODELS_HPP
