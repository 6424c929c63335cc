#include "noncelab/events.hpp"

#include "noncelab/errors.hpp"

namespace noncelab {

std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::MaskCompute: return "MaskCompute";
    case OpKind::InvMaskCompute: return "InvMaskCompute";
    case OpKind::DeltaCompute: return "DeltaCompute";
    case OpKind::StoreA: return "StoreA";
    case OpKind::StoreB: return "StoreB";
    case OpKind::FieldMul: return "FieldMul";
    case OpKind::FieldSquare: return "FieldSquare";
    case OpKind::FieldAddSub: return "FieldAddSub";
    case OpKind::Rerandomize: return "Rerandomize";
  }
  return "?";
}

void EventRecorder::emit(OpKind op, uint32_t leak_value) {
  if (is_word_op(op) && leak_value > 64) throw DomainError("word-level leak value above 64");
  events_.push_back({op, leak_value, static_cast<uint64_t>(events_.size()), cond_});
}

void EventRecorder::open(SegmentKind kind, int cond) {
  if (open_) throw DomainError("nested recorder segment");
  open_ = true;
  cond_ = static_cast<int8_t>(cond);
  const uint32_t idx = static_cast<uint32_t>(kind == SegmentKind::Swap ? swaps_ : steps_);
  segments_.push_back({kind, events_.size(), events_.size(), cond_, idx});
}

void EventRecorder::close(SegmentKind kind) {
  if (!open_ || segments_.back().kind != kind) throw DomainError("unbalanced recorder segment");
  segments_.back().end_event = events_.size();
  open_ = false;
  cond_ = kCondUnknown;
  (kind == SegmentKind::Swap ? swaps_ : steps_)++;
}

void EventRecorder::begin_swap(int cond) {
  if (cond != 0 && cond != 1) throw DomainError("swap condition must be 0 or 1");
  open(SegmentKind::Swap, cond);
}
void EventRecorder::end_swap() { close(SegmentKind::Swap); }
void EventRecorder::begin_step() { open(SegmentKind::Step, kCondUnknown); }
void EventRecorder::end_step() { close(SegmentKind::Step); }

std::vector<int> EventRecorder::swap_conditions() const {
  std::vector<int> out;
  out.reserve(swaps_);
  for (const auto& s : segments_)
    if (s.kind == SegmentKind::Swap) out.push_back(s.cond);
  return out;
}

void EventRecorder::clear() { *this = EventRecorder{}; }

}  // namespace noncelab
