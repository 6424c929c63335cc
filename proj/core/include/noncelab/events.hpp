#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace noncelab {

/// Abstract micro-operations whose data-dependent activity is recorded.
enum class OpKind : uint8_t {
  MaskCompute,
  InvMaskCompute,
  DeltaCompute,
  StoreA,
  StoreB,
  FieldMul,
  FieldSquare,
  FieldAddSub,
  Rerandomize,
};

std::string_view to_string(OpKind op);

/// Word-level operations (leak values bounded by 64).
constexpr bool is_word_op(OpKind op) {
  return op != OpKind::FieldMul && op != OpKind::FieldSquare && op != OpKind::FieldAddSub;
}
constexpr bool is_mul_like(OpKind op) { return op == OpKind::FieldMul || op == OpKind::FieldSquare; }

constexpr int8_t kCondUnknown = -1;

struct SwapTraceEvent {
  OpKind op;
  uint32_t leak_value;  // Hamming weight or distance
  uint64_t time_index;
  int8_t ground_truth_cond;
};

enum class SegmentKind : uint8_t { Swap, Step };

/// A contiguous run of events: one conditional swap or one multiplier step.
struct EventSegment {
  SegmentKind kind;
  size_t first_event;
  size_t end_event;  // exclusive
  int8_t cond;       // swap condition, kCondUnknown for steps
  uint32_t index;    // ordinal among segments of the same kind
};

/// Single-owner event sink attached to one scalar multiplication.
class EventRecorder {
 public:
  void emit(OpKind op, uint32_t leak_value);

  void begin_swap(int cond);
  void end_swap();
  void begin_step();
  void end_step();

  const std::vector<SwapTraceEvent>& events() const { return events_; }
  const std::vector<EventSegment>& segments() const { return segments_; }

  size_t swap_count() const { return swaps_; }
  size_t step_count() const { return steps_; }
  /// Ground-truth swap conditions in recording order.
  std::vector<int> swap_conditions() const;

  void clear();

 private:
  void open(SegmentKind kind, int cond);
  void close(SegmentKind kind);

  std::vector<SwapTraceEvent> events_;
  std::vector<EventSegment> segments_;
  bool open_ = false;
  int8_t cond_ = kCondUnknown;
  size_t swaps_ = 0;
  size_t steps_ = 0;
};

}  // namespace noncelab
