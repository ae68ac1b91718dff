"""Binary persistence for :class:`ResidualNet`.

Layout (all integers little-endian)::

    b"ULGF"                      magic
    u32 version                  currently 1
    u32 height, width, channels  network input
    u32 n_classes, head_depth, head_hidden
    u32 width1, width2           conv channel counts
    u32 n_tensors
    n_tensors x { u16 name_len, name (utf-8), u8 ndim, u32 dims[ndim] }
    float32 data of every tensor, in table order, C order

Tensor order is conv1, res1.a, res1.b, conv2, res2.a, res2.b (weight then
bias each), then fc1.w, fc1.b when the head has two layers, then fc.w, fc.b.
Conv weights are ``(3, 3, in, out)``, dense weights ``(in, out)``.
"""

import struct
from pathlib import Path

import numpy as np

from ..errors import IngestionError
from .network import ResidualNet

MAGIC = b"ULGF"
VERSION = 1


def model_bytes(net):
    parts = [MAGIC, struct.pack("<I", VERSION)]
    parts.append(struct.pack("<3I", *net.input_shape))
    parts.append(struct.pack("<3I", net.n_classes, net.head_depth, net.head_hidden))
    parts.append(struct.pack("<2I", *net.widths))
    parts.append(struct.pack("<I", len(net.params)))
    for name, arr in net.params.items():
        raw = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw)
        parts.append(struct.pack("<B", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape))
    for arr in net.params.values():
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(parts)


def save_model(net, path):
    Path(path).write_bytes(model_bytes(net))


def load_model(path, dtype=np.float64):
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IngestionError(f"cannot read model ({exc})", path) from exc
    if data[:4] != MAGIC:
        raise IngestionError("not a ULGF model file", path)
    off = 4
    try:
        (version,) = struct.unpack_from("<I", data, off)
        if version != VERSION:
            raise IngestionError(f"unsupported model version {version}", path)
        off += 4
        shape = struct.unpack_from("<3I", data, off); off += 12
        n_classes, head_depth, head_hidden = struct.unpack_from("<3I", data, off); off += 12
        widths = struct.unpack_from("<2I", data, off); off += 8
        (n_tensors,) = struct.unpack_from("<I", data, off); off += 4
        table = []
        for _ in range(n_tensors):
            (nlen,) = struct.unpack_from("<H", data, off); off += 2
            name = data[off:off + nlen].decode("utf-8"); off += nlen
            (ndim,) = struct.unpack_from("<B", data, off); off += 1
            dims = struct.unpack_from(f"<{ndim}I", data, off); off += 4 * ndim
            table.append((name, dims))
        net = ResidualNet(n_classes, shape, head_depth, head_hidden, widths=widths, dtype=dtype)
        params = {}
        for name, dims in table:
            count = int(np.prod(dims)) if dims else 1
            arr = np.frombuffer(data, dtype="<f4", count=count, offset=off).reshape(dims)
            off += 4 * count
            params[name] = arr.astype(dtype)
    except (struct.error, ValueError) as exc:
        raise IngestionError(f"truncated or corrupt model ({exc})", path) from exc
    if set(params) != set(net.params) or any(params[k].shape != net.params[k].shape for k in params):
        raise IngestionError("model tensor table does not match the network layout", path)
    net.params = {k: params[k] for k in net.params}
    return net
