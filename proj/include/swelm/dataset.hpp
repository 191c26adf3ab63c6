#pragma once

#include <utility>

#include <Eigen/Dense>

#include "swelm/errors.hpp"

namespace swelm {

// Paired sample of an expensive model: inputs in [0,1]^d, scalar outputs.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd outputs)
      : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
    if (inputs_.rows() != outputs_.size()) {
      throw ConfigError("Dataset: input rows and output length differ");
    }
    if ((inputs_.array() < 0.0).any() || (inputs_.array() > 1.0).any() ||
        !inputs_.allFinite()) {
      throw ConfigError("Dataset: inputs must lie in the unit cube");
    }
  }

  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index dimension() const { return inputs_.cols(); }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& outputs() const { return outputs_; }

 private:
  Eigen::MatrixXd inputs_;   // m x d
  Eigen::VectorXd outputs_;  // m
};

}  // namespace swelm
