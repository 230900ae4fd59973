#pragma once

#include <stdexcept>
#include <string>

namespace gadi {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define GADI_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    }

GADI_DEFINE_ERROR(RangeOverflow);
GADI_DEFINE_ERROR(DimensionMismatch);
GADI_DEFINE_ERROR(NonSquare);
GADI_DEFINE_ERROR(SizeOverflow);
GADI_DEFINE_ERROR(NonPositiveAlpha);
GADI_DEFINE_ERROR(InvalidConfig);
GADI_DEFINE_ERROR(DenseCapExceeded);
GADI_DEFINE_ERROR(ZeroReference);
GADI_DEFINE_ERROR(ZeroError);
GADI_DEFINE_ERROR(SingularMatrix);
GADI_DEFINE_ERROR(IllConditionedGram);
GADI_DEFINE_ERROR(AllDiverged);
GADI_DEFINE_ERROR(EscalationExhausted);
GADI_DEFINE_ERROR(ParseError);

#undef GADI_DEFINE_ERROR

} // namespace gadi
