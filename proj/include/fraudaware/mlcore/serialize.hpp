#pragma once

#include "fraudaware/io.hpp"
#include "fraudaware/mlcore/matrix.hpp"

namespace fraudaware::mlcore {

// Row-major nested arrays. Doubles go through the JSON library's
// round-trip formatting, so reloads are exact.
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

}  // namespace fraudaware::mlcore
