#include "s2r/errors.hpp"

namespace s2r {

void require_shape(bool cond, const std::string& what) {
    if (!cond) throw ShapeError(what);
}

void require_arg(bool cond, const std::string& what) {
    if (!cond) throw ArgumentError(what);
}

}  // namespace s2r
