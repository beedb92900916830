use std::fmt;

/// Upper bound on the channel count; channel sets are stored as 64-bit masks.
pub const MAX_CHANNELS: usize = 64;

/// A set of channel ids below [`MAX_CHANNELS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ChannelMask(u64);

impl ChannelMask {
    pub const EMPTY: ChannelMask = ChannelMask(0);

    pub fn single(channel: usize) -> Self {
        debug_assert!(channel < MAX_CHANNELS);
        ChannelMask(1u64 << channel)
    }

    /// All channels in `0..count`.
    pub fn all(count: usize) -> Self {
        if count >= MAX_CHANNELS {
            ChannelMask(u64::MAX)
        } else {
            ChannelMask((1u64 << count) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> Self {
        ChannelMask(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, channel: usize) -> bool {
        channel < MAX_CHANNELS && self.0 & (1u64 << channel) != 0
    }

    pub fn insert(&mut self, channel: usize) {
        self.0 |= 1u64 << channel;
    }

    pub fn remove(&mut self, channel: usize) {
        self.0 &= !(1u64 << channel);
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn lowest(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn intersection(self, other: ChannelMask) -> ChannelMask {
        ChannelMask(self.0 & other.0)
    }

    /// Channel ids in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let c = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(c)
        })
    }
}

impl FromIterator<usize> for ChannelMask {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut m = ChannelMask::EMPTY;
        for c in iter {
            m.insert(c);
        }
        m
    }
}

impl fmt::Display for ChannelMask {
    /// Comma-separated ascending ids, `-` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
