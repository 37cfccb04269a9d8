"""
Recurrent backbones producing per-frame (or per-column) output activations.

Both networks run in float64 and return pre-softmax activations of shape
(T, output_dim); the CTC layer lives in ctc.py.
"""
import torch
import torch.nn as nn

# MDLSTM gate layout inside the 5H pre-activation: i, f_up, f_left, o, g
MD_GATES = 5


class BLSTMNetwork(nn.Module):
    """
    Bidirectional LSTM over frames; both directions are projected and summed.

    Args:
        input_dim: Frame dimension D
        hidden_units: Units per direction H
        output_dim: Alphabet size including the blank
    """

    def __init__(self, input_dim: int, hidden_units: int, output_dim: int):
        super().__init__()
        self.hidden_units = hidden_units
        self.lstm = nn.LSTM(input_size=input_dim, hidden_size=hidden_units, bidirectional=True)
        self.proj_forward = nn.Linear(hidden_units, output_dim)
        self.proj_backward = nn.Linear(hidden_units, output_dim, bias=False)
        self.double()

    def forget_bias_slices(self):
        """(parameter name, slice) pairs holding forget-gate biases (torch order i, f, g, o)."""
        h = self.hidden_units
        return [("lstm.bias_ih_l0", slice(h, 2 * h)), ("lstm.bias_ih_l0_reverse", slice(h, 2 * h))]

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        """
        Args:
            frames: (T, D) tensor

        Returns:
            (T, output_dim) activations
        """
        hidden, _ = self.lstm(frames.unsqueeze(1))
        hidden = hidden[:, 0, :]
        h = self.hidden_units
        return self.proj_forward(hidden[:, :h]) + self.proj_backward(hidden[:, h:])


class MDLSTMScan(nn.Module):
    """
    One 2-D LSTM pass from the top-left corner with two recurrent predecessors
    (the cell above and the cell to the left).

    Cells on one anti-diagonal are independent, so each diagonal is computed as
    a batch.
    """

    def __init__(self, channels: int, hidden_units: int):
        super().__init__()
        self.hidden_units = hidden_units
        self.input_proj = nn.Linear(channels, MD_GATES * hidden_units)
        self.recur_up = nn.Linear(hidden_units, MD_GATES * hidden_units, bias=False)
        self.recur_left = nn.Linear(hidden_units, MD_GATES * hidden_units, bias=False)

    def forward(self, volume: torch.Tensor) -> torch.Tensor:
        """
        Args:
            volume: (height, width, channels) tensor

        Returns:
            (width, H) hidden activations summed over the height axis
        """
        height, width, _ = volume.shape
        h_units = self.hidden_units
        pre_input = self.input_proj(volume)

        h_prev = volume.new_zeros((0, h_units))
        c_prev = volume.new_zeros((0, h_units))
        prev_lo, prev_hi = 0, -1
        hidden_cells, columns = [], []

        for d in range(height + width - 1):
            lo, hi = max(0, d - width + 1), min(height - 1, d)
            ys = torch.arange(lo, hi + 1)
            xs = d - ys
            n = hi - lo + 1

            # previous diagonal padded to rows lo-1 .. hi; missing predecessors are zero
            below = volume.new_zeros((prev_lo - lo + 1, h_units))
            above = volume.new_zeros((hi - prev_hi, h_units))
            h_pad = torch.cat([below, h_prev, above])
            c_pad = torch.cat([below, c_prev, above])

            gates = pre_input[ys, xs] + self.recur_up(h_pad[:n]) + self.recur_left(h_pad[1:n + 1])
            sig = torch.sigmoid(gates[:, :4 * h_units])
            i_gate, f_up, f_left, o_gate = sig.chunk(4, dim=1)
            candidate = torch.tanh(gates[:, 4 * h_units:])

            cell = i_gate * candidate + f_up * c_pad[:n] + f_left * c_pad[1:n + 1]
            hidden = o_gate * torch.tanh(cell)

            hidden_cells.append(hidden)
            columns.append(xs)
            h_prev, c_prev, prev_lo, prev_hi = hidden, cell, lo, hi

        collapsed = volume.new_zeros((width, h_units))
        return collapsed.index_add(0, torch.cat(columns), torch.cat(hidden_cells))


class MDLSTMNetwork(nn.Module):
    """
    Four-direction MDLSTM with a height-sum collapse layer.

    The (T, D) frame matrix is read back as the (frame_height, T, channels)
    volume it was serialized from; each corner scan is collapsed over height,
    projected, and the projections are summed per column.

    Args:
        input_dim: Frame dimension D = channels * frame_height
        hidden_units: Units per scan direction H
        output_dim: Alphabet size including the blank
        frame_height: Rows per frame
    """

    # (flip height, flip width) per scan origin
    ORIGINS = ((False, False), (True, False), (False, True), (True, True))

    def __init__(self, input_dim: int, hidden_units: int, output_dim: int, frame_height: int):
        super().__init__()
        if input_dim % frame_height != 0:
            raise ValueError(f"input_dim {input_dim} is not a multiple of frame_height {frame_height}")
        self.hidden_units = hidden_units
        self.frame_height = frame_height
        self.channels = input_dim // frame_height
        self.scans = nn.ModuleList([MDLSTMScan(self.channels, hidden_units) for _ in self.ORIGINS])
        self.projections = nn.ModuleList(
            [nn.Linear(hidden_units, output_dim, bias=False) for _ in self.ORIGINS]
        )
        self.output_bias = nn.Parameter(torch.zeros(output_dim))
        self.double()

    def forget_bias_slices(self):
        h = self.hidden_units
        return [(f"scans.{k}.input_proj.bias", slice(h, 3 * h)) for k in range(len(self.ORIGINS))]

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        """
        Args:
            frames: (T, D) tensor

        Returns:
            (T, output_dim) activations, one row per column
        """
        steps = frames.shape[0]
        volume = frames.reshape(steps, self.channels, self.frame_height).permute(2, 0, 1)
        out = self.output_bias.expand(steps, -1)
        for (flip_y, flip_x), scan, projection in zip(self.ORIGINS, self.scans, self.projections):
            dims = [axis for axis, flip in ((0, flip_y), (1, flip_x)) if flip]
            oriented = torch.flip(volume, dims) if dims else volume
            collapsed = scan(oriented)
            if flip_x:
                collapsed = torch.flip(collapsed, [0])
            out = out + projection(collapsed)
        return out
