#pragma once
namespace gwr {}
