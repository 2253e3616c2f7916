# Regenerates golden_two.ply: two splats, color degree 1, opacity degree 1.
import json
import struct

elements = [
    dict(pos=(0.5, -0.25, 1.0), rot=(1.0, 0.0, 0.0, 0.0), log_scale=(-1.0, -2.0, -3.0),
         color=[[(c * 4 + k) * 0.125 - 0.5 for k in range(4)] for c in range(3)],
         opacity=[2.0, 0.125, -0.125, 0.25], lc=0.75),
    dict(pos=(-1.0, 2.0, 0.125), rot=(0.5, 0.5, 0.5, 0.5), log_scale=(0.0, 0.5, -0.5),
         color=[[(c * 4 + k) * 0.0625 for k in range(4)] for c in range(3)],
         opacity=[1.5, 0.0, 0.0, 0.0], lc=1.25),
]

props = ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"]
props += [f"f_rest_{i}" for i in range(9)]
props += ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
props += [f"o_rest_{i}" for i in range(3)]
props += ["lc_v"]

header = "ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
header += "".join(f"property float {p}\n" for p in props) + "end_header\n"
body = b""
for e in elements:
    row = list(e["pos"]) + [0.0, 0.0, 0.0]
    row += [e["color"][c][0] for c in range(3)]
    row += [e["color"][c][k] for c in range(3) for k in range(1, 4)]
    row += [e["opacity"][0]] + list(e["log_scale"]) + list(e["rot"]) + e["opacity"][1:] + [e["lc"]]
    assert len(row) == len(props)
    body += struct.pack("<%df" % len(row), *row)

with open("golden_two.ply", "wb") as f:
    f.write(header.encode() + body)
with open("golden_two.ply.wsr.json", "w") as f:
    json.dump({"weight_model": "exp", "sigma": 0.25, "beta": 1.5, "background_weight": 0.5,
               "background_color": [0.25, 0.5, 1.0], "sh_degree_color": 1, "sh_degree_opacity": 1}, f, indent=2)
    f.write("\n")
