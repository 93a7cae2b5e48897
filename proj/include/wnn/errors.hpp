#pragma once

#include <stdexcept>
#include <string>

namespace wnn {

// Base type for everything the library can throw. Catching wnn::Error at the
// CLI boundary maps any domain failure to exit code 1.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define WNN_DEFINE_ERROR(NAME)                                        \
    struct NAME : Error {                                             \
        explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
    }

// filterbank
WNN_DEFINE_ERROR(UnknownWavelet);
WNN_DEFINE_ERROR(OddFilterLength);
WNN_DEFINE_ERROR(LengthMismatch);

// transforms
WNN_DEFINE_ERROR(InvalidExtent);
WNN_DEFINE_ERROR(NonFiniteInput);
WNN_DEFINE_ERROR(BandShapeMismatch);
WNN_DEFINE_ERROR(NonIntegralResult);

// netlab
WNN_DEFINE_ERROR(ShapeMismatch);
WNN_DEFINE_ERROR(InvalidConfig);
WNN_DEFINE_ERROR(NegativeLambda);
WNN_DEFINE_ERROR(DivergedLoss);
WNN_DEFINE_ERROR(EmptyDataset);
WNN_DEFINE_ERROR(KinkProximity);

// robustness
WNN_DEFINE_ERROR(OutOfRangeInput);
WNN_DEFINE_ERROR(ZeroBaseline);

// io
WNN_DEFINE_ERROR(MalformedHeader);
WNN_DEFINE_ERROR(UnsupportedMaxval);
WNN_DEFINE_ERROR(TruncatedPayload);
WNN_DEFINE_ERROR(BadMagic);
WNN_DEFINE_ERROR(UnsupportedVersion);
WNN_DEFINE_ERROR(DuplicateName);
WNN_DEFINE_ERROR(IoFailure);

#undef WNN_DEFINE_ERROR

}  // namespace wnn
