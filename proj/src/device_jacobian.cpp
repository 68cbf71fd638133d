// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

#include "stiffmor/powersys/device_jacobian.hpp"

namespace stiffmor::powersys
{

template class DeviceImpl<GridFormingConverter>;
template class DeviceImpl<GridFollowingConverter>;
template class DeviceImpl<SyncGen>;

} // namespace stiffmor::powersys
