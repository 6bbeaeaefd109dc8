#include "sabal/matrix.hpp"

#include <string>

#include "sabal/error.hpp"

namespace sabal {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw Error(ErrorCode::DimensionMismatch,
                "matrix storage has " + std::to_string(data_.size()) + " entries, expected " +
                    std::to_string(rows * cols));
}

}  // namespace sabal
