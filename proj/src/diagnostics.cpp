#include "sparsedom/diagnostics.hpp"

namespace sparsedom {

Diagnostics& diagnostics() {
    static Diagnostics d;
    return d;
}

}  // namespace sparsedom
