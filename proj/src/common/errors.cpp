#include "common/errors.hpp"

namespace nmp {

FormatError::FormatError(std::string field, const std::string& detail)
    : Error(field + ": " + detail)
    , mField(std::move(field))
{
}

} // namespace nmp
