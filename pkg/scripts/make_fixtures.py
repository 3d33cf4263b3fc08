#!/usr/bin/env python3
"""Generate the network fixture JSON files checked into src/dpsim/fixtures.

Layer geometries are derived from the public Caffe model definitions
(convolution output sizes use floor arithmetic, pooling uses ceil, as Caffe
does). Grouped convolutions count the per-group fan-in in the reduction.
Run from the repository root:

    python scripts/make_fixtures.py
"""

import json
import math
import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "dpsim", "fixtures")


def conv_out(size, k, stride, pad):
    return (size + 2 * pad - k) // stride + 1


def pool_out(size, k, stride):
    return math.ceil((size - k) / stride) + 1


class Net:
    def __init__(self, name):
        self.name = name
        self.layers = []

    def conv(self, name, size, in_ch, k, stride, pad, out_ch, groups=1, p_a=16, n_l=0):
        out = conv_out(size, k, stride, pad)
        windows = out * out
        reduction = (in_ch // groups) * k * k
        self.layers.append(
            {
                "name": name,
                "type": "conv",
                "windows": windows,
                "reduction": reduction,
                "filters": out_ch,
                "macs": windows * reduction * out_ch,
                "p_a": p_a,
                "p_w": 16,
                "n_l": n_l,
            }
        )
        return out

    def fc(self, name, inputs, outputs, p=16, n_l=0):
        self.layers.append(
            {
                "name": name,
                "type": "fc",
                "inputs": inputs,
                "outputs": outputs,
                "macs": inputs * outputs,
                "p_a": p,
                "p_w": p,
                "n_l": n_l,
            }
        )

    def write(self, expectations=None):
        data = {"name": self.name, "width": 16, "layers": self.layers}
        if expectations:
            data["effective_precision_expectations"] = expectations
        path = os.path.join(OUT_DIR, f"{self.name}.json")
        with open(path, "w") as fh:
            json.dump(data, fh, indent=1)
            fh.write("\n")
        print(f"wrote {path} ({len(self.layers)} layers)")


def alexnet():
    n = Net("alexnet")
    s = n.conv("conv1", 227, 3, 11, 4, 0, 96, p_a=9)
    s = pool_out(s, 3, 2)
    s = n.conv("conv2", s, 96, 5, 1, 2, 256, groups=2, p_a=8)
    s = pool_out(s, 3, 2)
    s = n.conv("conv3", s, 256, 3, 1, 1, 384, p_a=5)
    s = n.conv("conv4", s, 384, 3, 1, 1, 384, groups=2, p_a=5)
    s = n.conv("conv5", s, 384, 3, 1, 1, 256, groups=2, p_a=7)
    n.fc("fc6", 9216, 4096, p=10)
    n.fc("fc7", 4096, 4096, p=9)
    n.fc("fc8", 4096, 1000, p=9)
    n.write(
        {
            "activations": [5.39, 7.36, 4.22, 4.40, 5.81],
            "activation_reduction_pct": 22.59,
            "weights": [8.36, 7.62, 7.62, 7.44, 7.55],
            "weight_reduction_pct": 22.55,
        }
    )


def vgg_s():
    n = Net("vgg_s")
    s = n.conv("conv1", 224, 3, 7, 2, 0, 96, p_a=7)
    s = pool_out(s, 3, 3)
    s = n.conv("conv2", s, 96, 5, 1, 0, 256, p_a=8)
    s = pool_out(s, 2, 2)
    s = n.conv("conv3", s, 256, 3, 1, 1, 512, p_a=9)
    s = n.conv("conv4", s, 512, 3, 1, 1, 512, p_a=7)
    s = n.conv("conv5", s, 512, 3, 1, 1, 512, p_a=9)
    s = pool_out(s, 3, 3)
    n.fc("fc6", s * s * 512, 4096, p=10)
    n.fc("fc7", 4096, 4096, p=9)
    n.fc("fc8", 4096, 1000, p=9)
    n.write(
        {
            "activations": [5.28, 5.05, 5.82, 3.38, 4.80],
            "activation_reduction_pct": 38.85,
            "weights": [9.94, 6.96, 8.53, 8.13, 8.10],
            "weight_reduction_pct": 22.26,
        }
    )


def vgg_m():
    n = Net("vgg_m")
    s = n.conv("conv1", 224, 3, 7, 2, 0, 96, p_a=7)
    s = pool_out(s, 3, 2)
    s = n.conv("conv2", s, 96, 5, 2, 1, 256, p_a=7)
    s = pool_out(s, 3, 2)
    s = n.conv("conv3", s, 256, 3, 1, 1, 512, p_a=7)
    s = n.conv("conv4", s, 512, 3, 1, 1, 512, p_a=8)
    s = n.conv("conv5", s, 512, 3, 1, 1, 512, p_a=7)
    s = pool_out(s, 3, 2)
    n.fc("fc6", s * s * 512, 4096, p=10)
    n.fc("fc7", 4096, 4096, p=9)
    n.fc("fc8", 4096, 1000, p=9)
    n.write(
        {
            "activations": [5.28, 5.05, 5.04, 5.37, 4.00],
            "activation_reduction_pct": 30.47,
            "weights": [9.87, 7.55, 8.52, 8.16, 8.14],
            "weight_reduction_pct": 21.76,
        }
    )


def vgg_19():
    precisions = [12, 12, 12, 11, 12, 10, 11, 11, 13, 12, 13, 13, 13, 13, 13, 13]
    blocks = [(2, 64), (2, 128), (4, 256), (4, 512), (4, 512)]
    n = Net("vgg_19")
    s = 224
    in_ch = 3
    i = 0
    for b, (reps, ch) in enumerate(blocks, start=1):
        for r in range(1, reps + 1):
            s = n.conv(f"conv{b}_{r}", s, in_ch, 3, 1, 1, ch, p_a=precisions[i])
            in_ch = ch
            i += 1
        s = pool_out(s, 2, 2)
    n.fc("fc6", s * s * 512, 4096, p=10)
    n.fc("fc7", 4096, 4096, p=9)
    n.fc("fc8", 4096, 1000, p=9)
    n.write(
        {
            "activations": [9.05, 7.69, 10.04, 9.00, 11.08, 8.74, 9.65, 8.29,
                            11.55, 10.37, 12.22, 11.67, 11.53, 11.54, 10.40, 5.9],
            "activation_reduction_pct": 21.20,
            "weights": [10.98, 9.81, 9.31, 9.09, 8.58, 8.04, 7.89, 7.86,
                        7.51, 7.20, 7.36, 7.47, 7.61, 7.66, 7.66, 7.63],
            "weight_reduction_pct": 29.65,
        }
    )


def neuraltalk():
    # LSTM caption generator: gate matrices for the unrolled step plus the
    # vocabulary decoder; a single precision covers all iterations.
    n = Net("neuraltalk")
    n.fc("lstm_input_gates", 512, 2048, p=11)
    n.fc("lstm_hidden_gates", 512, 2048, p=11)
    n.fc("decoder", 512, 8800, p=11)
    n.write()


def denoise():
    # 17x17 patch in, 4 hidden layers of 2047, 17x17 patch out.
    n = Net("denoise")
    n.fc("fc1", 289, 2047, p=12)
    n.fc("fc2", 2047, 2047, p=12)
    n.fc("fc3", 2047, 2047, p=12)
    n.fc("fc4", 2047, 2047, p=12)
    n.fc("fc5", 2047, 289, p=12)
    n.write()


def nin():
    n = Net("nin")
    s = n.conv("conv1", 227, 3, 11, 4, 0, 96)
    s = n.conv("cccp1", s, 96, 1, 1, 0, 96)
    s = n.conv("cccp2", s, 96, 1, 1, 0, 96)
    s = pool_out(s, 3, 2)
    s = n.conv("conv2", s, 96, 5, 1, 2, 256)
    s = n.conv("cccp3", s, 256, 1, 1, 0, 256)
    s = n.conv("cccp4", s, 256, 1, 1, 0, 256)
    s = pool_out(s, 3, 2)
    s = n.conv("conv3", s, 256, 3, 1, 1, 384)
    s = n.conv("cccp5", s, 384, 1, 1, 0, 384)
    s = n.conv("cccp6", s, 384, 1, 1, 0, 384)
    s = pool_out(s, 3, 2)
    s = n.conv("conv4", s, 384, 3, 1, 1, 1024)
    s = n.conv("cccp7", s, 1024, 1, 1, 0, 1024)
    s = n.conv("cccp8", s, 1024, 1, 1, 0, 1000)
    n.write(
        {
            "activations": [6.37, 7.13, 7.79, 6.97, 5.77, 5.15, 4.73, 6.78,
                            8.36, 7.51, 7.64, 7.58],
            "activation_reduction_pct": 23.56,
            "weights": [8.85, 10.29, 10.21, 7.65, 9.13, 9.04, 7.63, 8.65,
                        8.62, 7.79, 7.96, 8.18],
            "weight_reduction_pct": 19.20,
        }
    )


# (1x1, 3x3 reduce, 3x3, 5x5 reduce, 5x5, pool proj)
GOOGLENET_INCEPTION = [
    ("3a", 28, 192, 64, 96, 128, 16, 32, 32),
    ("3b", 28, 256, 128, 128, 192, 32, 96, 64),
    ("4a", 14, 480, 192, 96, 208, 16, 48, 64),
    ("4b", 14, 512, 160, 112, 224, 24, 64, 64),
    ("4c", 14, 512, 128, 128, 256, 24, 64, 64),
    ("4d", 14, 512, 112, 144, 288, 32, 64, 64),
    ("4e", 14, 528, 256, 160, 320, 32, 128, 128),
    ("5a", 7, 832, 256, 160, 320, 32, 128, 128),
    ("5b", 7, 832, 384, 192, 384, 48, 128, 128),
]

GOOGLENET_ACT = [
    6.19, 5.94, 5.74, 6.77, 6.91, 6.77, 6.86, 6.77,
    6.92, 6.31, 5.96, 6.31, 6.00, 6.31, 6.55, 5.33,
    5.33, 5.33, 5.33, 5.33, 5.48, 6.74, 6.33, 6.74,
    6.51, 6.74, 7.07, 6.35, 6.17, 6.35, 5.88, 6.35,
    6.56, 5.07, 4.69, 5.07, 4.82, 5.07, 5.31, 5.53,
    4.89, 5.53, 5.70, 5.53, 5.86, 7.88, 7.62, 7.88,
    8.07, 7.88, 8.31, 4.97, 3.85, 4.97, 3.61, 4.97, 5.36,
]

GOOGLENET_WEI = [
    9.80, 10.91, 9.35, 10.21, 10.02, 9.02, 10.06,
    9.34, 10.29, 9.61, 9.73, 8.63, 9.93, 8.65, 9.64,
    9.31, 9.48, 8.79, 9.27, 8.94, 9.30, 9.10, 9.03,
    8.25, 7.27, 8.56, 9.15, 9.26, 9.17, 8.21, 7.32,
    8.55, 9.01, 9.15, 9.33, 8.22, 9.21, 8.44, 9.12,
    8.54, 8.68, 7.47, 9.11, 7.93, 8.86, 8.52, 8.59,
    7.77, 8.85, 8.14, 8.88, 8.28, 8.81, 7.61, 8.81,
    7.52, 8.40,
]


def googlenet():
    n = Net("googlenet")
    n.conv("conv1", 224, 3, 7, 2, 3, 64)
    n.conv("conv2_reduce", 56, 64, 1, 1, 0, 64)
    n.conv("conv2", 56, 64, 3, 1, 1, 192)
    for mod, size, in_ch, n1, n3r, n3, n5r, n5, pp in GOOGLENET_INCEPTION:
        n.conv(f"inception_{mod}_1x1", size, in_ch, 1, 1, 0, n1)
        n.conv(f"inception_{mod}_3x3_reduce", size, in_ch, 1, 1, 0, n3r)
        n.conv(f"inception_{mod}_3x3", size, n3r, 3, 1, 1, n3)
        n.conv(f"inception_{mod}_5x5_reduce", size, in_ch, 1, 1, 0, n5r)
        n.conv(f"inception_{mod}_5x5", size, n5r, 5, 1, 2, n5)
        n.conv(f"inception_{mod}_pool_proj", size, in_ch, 1, 1, 0, pp)
    n.fc("loss3_classifier", 1024, 1000)
    assert len(GOOGLENET_ACT) == 57 and len(GOOGLENET_WEI) == 57
    assert sum(1 for l in n.layers if l["type"] == "conv") == 57
    n.write(
        {
            "activations": GOOGLENET_ACT,
            "activation_reduction_pct": 36.30,
            "weights": GOOGLENET_WEI,
            "weight_reduction_pct": 17.27,
        }
    )


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    alexnet()
    vgg_s()
    vgg_m()
    vgg_19()
    neuraltalk()
    denoise()
    nin()
    googlenet()


if __name__ == "__main__":
    main()
