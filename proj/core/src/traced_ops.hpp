#pragma once

#include <bit>

#include "noncelab/curve.hpp"
#include "noncelab/events.hpp"

namespace noncelab::detail {

/// Field arithmetic that reports each operation to an optional recorder.
/// The leak value of an arithmetic event is the Hamming weight of the low
/// word of its result.
class TracedOps {
 public:
  explicit TracedOps(EventRecorder* rec) : rec_(rec) {}

  FieldElement mul(const FieldElement& a, const FieldElement& b) {
    return note(OpKind::FieldMul, a * b);
  }
  FieldElement sqr(const FieldElement& a) { return note(OpKind::FieldSquare, a.square()); }
  FieldElement add(const FieldElement& a, const FieldElement& b) {
    return note(OpKind::FieldAddSub, a + b);
  }
  FieldElement sub(const FieldElement& a, const FieldElement& b) {
    return note(OpKind::FieldAddSub, a - b);
  }
  FieldElement shl(const FieldElement& a, unsigned bits) {
    return note(OpKind::FieldAddSub, a.shl(bits));
  }

 private:
  FieldElement note(OpKind op, FieldElement r) {
    if (rec_) rec_->emit(op, static_cast<uint32_t>(std::popcount(r.low_word())));
    return r;
  }
  EventRecorder* rec_;
};

/// Complete addition for short Weierstrass curves with arbitrary a
/// (Renes-Costello-Batina). No input validation.
ProjectivePoint add_complete(const ProjectivePoint& P, const ProjectivePoint& Q,
                             const CurveParams& curve, TracedOps& ops);

}  // namespace noncelab::detail
