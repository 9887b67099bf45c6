/// MSB-first bit packer.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            bit_len: 0,
        }
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn write(&mut self, value: u32, width: u32) {
        debug_assert!(width <= 32);
        debug_assert!(width == 32 || value >> width == 0, "value {value} wider than {width} bits");
        for k in (0..width).rev() {
            let bit = (value >> k) & 1;
            let pos = self.bit_len % 8;
            if pos == 0 {
                self.bytes.push(0);
            }
            if bit == 1 {
                *self.bytes.last_mut().expect("pushed above") |= 0x80 >> pos;
            }
            self.bit_len += 1;
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    /// Packed bytes, zero-padded to a byte boundary.
    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// Reads MSB-first fields; fails with the bit offset of the first missing bit.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn read(&mut self, width: u32) -> Result<u32, usize> {
        let end = self.pos + width as usize;
        if end > self.bytes.len() * 8 {
            return Err(self.bytes.len() * 8);
        }
        let mut v = 0u32;
        for p in self.pos..end {
            let bit = (self.bytes[p / 8] >> (7 - p % 8)) & 1;
            v = (v << 1) | u32::from(bit);
        }
        self.pos = end;
        Ok(v)
    }
}
