#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace viewclean {

template <typename Tag>
class StrongId {
public:
    using value_type = std::int64_t;

    constexpr StrongId() = default;
    constexpr explicit StrongId(value_type v) : value_(v) {}

    constexpr value_type value() const noexcept { return value_; }

    friend constexpr auto operator<=>(StrongId, StrongId) = default;
    friend std::ostream& operator<<(std::ostream& os, StrongId id) { return os << id.value_; }

private:
    value_type value_ = 0;
};

using RowId = StrongId<struct RowIdTag>;
using ViewId = StrongId<struct ViewIdTag>;
using MarkSetId = StrongId<struct MarkSetIdTag>;
using AuditId = StrongId<struct AuditIdTag>;

}  // namespace viewclean

template <typename Tag>
struct std::hash<viewclean::StrongId<Tag>> {
    std::size_t operator()(viewclean::StrongId<Tag> id) const noexcept {
        return std::hash<std::int64_t>{}(id.value());
    }
};
