#pragma once

#include <stdexcept>
#include <string>

namespace upk {

// Base of every error the library raises on bad input or inconsistent data.
// I/O failures while writing outputs derive from IoError instead so callers
// can tell user mistakes apart from environment problems.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define UPK_DECLARE_ERROR(Name, Base)       \
    class Name : public Base {              \
    public:                                 \
        using Base::Base;                   \
    };

// sequence_io
UPK_DECLARE_ERROR(ParseError, Error)
UPK_DECLARE_ERROR(SchemaError, Error)
UPK_DECLARE_ERROR(ConsistencyError, Error)
UPK_DECLARE_ERROR(DimensionMismatch, Error)
UPK_DECLARE_ERROR(DecodeError, Error)
UPK_DECLARE_ERROR(ScaleError, Error)

// seg_metrics / frame_filter
UPK_DECLARE_ERROR(FrameSetMismatch, Error)
UPK_DECLARE_ERROR(EmptyInput, Error)
UPK_DECLARE_ERROR(MixedLabels, Error)
UPK_DECLARE_ERROR(BadThreshold, Error)
UPK_DECLARE_ERROR(UnknownLabel, Error)

// geometry3d
UPK_DECLARE_ERROR(NonPositiveDepth, Error)
UPK_DECLARE_ERROR(TooFewPoints, Error)
UPK_DECLARE_ERROR(DegenerateGeometry, Error)
UPK_DECLARE_ERROR(NotARotation, Error)

// pose_tracker
UPK_DECLARE_ERROR(InitializationError, Error)
UPK_DECLARE_ERROR(NoComparableFrames, Error)

// synth_bench
UPK_DECLARE_ERROR(BadSpec, Error)
UPK_DECLARE_ERROR(OutOfRange, Error)
UPK_DECLARE_ERROR(ObjectOutOfView, Error)

#undef UPK_DECLARE_ERROR

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace upk
