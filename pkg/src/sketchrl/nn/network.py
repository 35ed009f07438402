"""Fixed-topology network with reverse-mode gradients.

Parameters live in a flat name -> array dict ("conv1.W", "conv1.b", ...);
the order of `spec.layers()` defines the canonical serialization order used
by the optimizer and the checkpoint format.
"""

import numpy as np

from ..errors import ContractViolation
from .ops import (
    conv_backward,
    conv_forward,
    fc_backward,
    fc_forward,
    relu_backward,
    relu_forward,
)
from .specs import ConvSpec, param_count


class Network:
    def __init__(self, spec, params):
        self.spec = spec
        self.params = params
        for layer in spec.layers():
            for suffix in ("W", "b"):
                if f"{layer.name}.{suffix}" not in params:
                    raise ContractViolation(f"missing parameter {layer.name}.{suffix}")

    @classmethod
    def init(cls, spec, seed, dtype=np.float32):
        """Fan-in-scaled uniform weights (bound sqrt(6/fan_in)), zero biases."""
        rng = np.random.Generator(np.random.Philox(seed))
        params = {}
        for layer in spec.layers():
            if isinstance(layer, ConvSpec):
                fan_in = layer.in_channels * layer.kernel * layer.kernel
                w_shape = (layer.out_channels, layer.in_channels, layer.kernel, layer.kernel)
                b_shape = (layer.out_channels,)
            else:
                fan_in = layer.in_features
                w_shape = (layer.in_features, layer.out_features)
                b_shape = (layer.out_features,)
            bound = np.sqrt(6.0 / fan_in)
            params[f"{layer.name}.W"] = rng.uniform(-bound, bound, w_shape).astype(dtype)
            params[f"{layer.name}.b"] = np.zeros(b_shape, dtype=dtype)
        return cls(spec, params)

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    @property
    def num_params(self):
        return param_count(self.spec)

    def astype(self, dtype):
        return Network(self.spec, {k: v.astype(dtype) for k, v in self.params.items()})

    def copy(self):
        return Network(self.spec, {k: v.copy() for k, v in self.params.items()})

    # -- forward ------------------------------------------------------------

    def forward(self, *stream_inputs, with_cache=False):
        """Run all streams, concatenate, run the fc head.

        Each input is (C,H,W) for a single sample or (B,C,H,W) for a batch;
        all inputs must agree. Single samples come back as a bare vector.
        """
        if len(stream_inputs) != len(self.spec.streams):
            raise ContractViolation(
                f"{self.spec.name} takes {len(self.spec.streams)} inputs, got {len(stream_inputs)}"
            )
        ndims = {np.ndim(x) for x in stream_inputs}
        if len(ndims) != 1 or ndims.pop() not in (3, 4):
            raise ContractViolation("inputs must all be (C,H,W) or all (B,C,H,W)")
        batched = stream_inputs[0].ndim == 4
        dtype = self.dtype

        flats = []
        stream_caches = []
        conv_out_shapes = []
        for stream, x in zip(self.spec.streams, stream_inputs):
            x = np.asarray(x, dtype=dtype)
            if not batched:
                x = x[None]
            if x.shape[1:] != stream.input_shape:
                raise ContractViolation(
                    f"stream {stream.name!r} expects {stream.input_shape}, got {x.shape[1:]}"
                )
            layer_caches = []
            for conv in stream.convs:
                x, conv_cache = conv_forward(
                    x, self.params[f"{conv.name}.W"], self.params[f"{conv.name}.b"], conv.stride
                )
                mask = None
                if conv.activation == "relu":
                    x, mask = relu_forward(x)
                layer_caches.append((conv_cache, mask))
            conv_out_shapes.append(x.shape)
            flats.append(x.reshape(x.shape[0], -1))
            stream_caches.append(layer_caches)

        h = np.concatenate(flats, axis=1) if len(flats) > 1 else flats[0]
        fc_caches = []
        for fc in self.spec.fcs:
            h, fc_cache = fc_forward(h, self.params[f"{fc.name}.W"], self.params[f"{fc.name}.b"])
            mask = None
            if fc.activation == "relu":
                h, mask = relu_forward(h)
            fc_caches.append((fc_cache, mask))

        out = h if batched else h[0]
        if not with_cache:
            return out
        cache = {
            "batched": batched,
            "streams": stream_caches,
            "conv_out_shapes": conv_out_shapes,
            "widths": [f.shape[1] for f in flats],
            "fcs": fc_caches,
            "out_shape": h.shape,
        }
        return out, cache

    # -- backward -----------------------------------------------------------

    def backward(self, grad_out, cache, need_input_grads=False):
        """Gradients of sum(grad_out * output) w.r.t. every parameter.

        Input gradients are skipped by default: nothing upstream of the first
        conv in each stream needs them, and the first global conv's col2im is
        pure overhead in training.
        """
        grad_out = np.asarray(grad_out, dtype=self.dtype)
        if not cache["batched"]:
            grad_out = grad_out[None]
        if grad_out.shape != cache["out_shape"]:
            raise ContractViolation(
                f"grad_out shape {grad_out.shape} does not match cached output {cache['out_shape']}"
            )

        grads = {}
        dy = grad_out
        for fc, (fc_cache, mask) in zip(reversed(self.spec.fcs), reversed(cache["fcs"])):
            if mask is not None:
                dy = relu_backward(dy, mask)
            dy, dw, db = fc_backward(dy, fc_cache)
            grads[f"{fc.name}.W"] = dw
            grads[f"{fc.name}.b"] = db

        input_grads = []
        offset = 0
        for stream, layer_caches, width, out_shape in zip(
            self.spec.streams, cache["streams"], cache["widths"], cache["conv_out_shapes"]
        ):
            dflat = dy[:, offset : offset + width]
            offset += width
            dx = dflat.reshape(out_shape)
            for i in range(len(stream.convs) - 1, -1, -1):
                conv = stream.convs[i]
                conv_cache, mask = layer_caches[i]
                if mask is not None:
                    dx = relu_backward(dx, mask)
                need_dx = i > 0 or need_input_grads
                dx, dw, db = conv_backward(dx, conv_cache, need_dx=need_dx)
                grads[f"{conv.name}.W"] = dw
                grads[f"{conv.name}.b"] = db
            if need_input_grads:
                input_grads.append(dx if cache["batched"] else dx[0])

        if need_input_grads:
            return grads, input_grads
        return grads
