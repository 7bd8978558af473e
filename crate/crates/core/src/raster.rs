//! Planar 8-bit images.

use crate::error::{invalid, Error, Result};

/// One 8-bit plane, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Channel {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Channel {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} channel needs {} bytes, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Channel {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, v: u8) -> Self {
        Channel {
            width,
            height,
            data: vec![v; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Three planes in R, G, B order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub channels: [Vec<u8>; 3],
}

impl RgbImage {
    pub fn new(width: usize, height: usize, channels: [Vec<u8>; 3]) -> Result<Self> {
        if channels.iter().any(|c| c.len() != width * height) {
            return Err(Error::DimensionMismatch(format!(
                "every plane of a {width}x{height} image needs {} bytes",
                width * height
            )));
        }
        Ok(RgbImage {
            width,
            height,
            channels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        RgbImage {
            width,
            height,
            channels: rgb.map(|v| vec![v; width * height]),
        }
    }

    /// Same plane replicated into all three channels.
    pub fn from_gray(gray: Channel) -> Self {
        RgbImage {
            width: gray.width,
            height: gray.height,
            channels: [gray.data.clone(), gray.data.clone(), gray.data],
        }
    }

    pub fn from_interleaved(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::DimensionMismatch("interleaved buffer size".into()));
        }
        let mut channels: [Vec<u8>; 3] = Default::default();
        for (k, ch) in channels.iter_mut().enumerate() {
            *ch = rgb.iter().skip(k).step_by(3).copied().collect();
        }
        Ok(RgbImage {
            width,
            height,
            channels,
        })
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        let n = self.width * self.height;
        let mut out = Vec::with_capacity(n * 3);
        for i in 0..n {
            for ch in &self.channels {
                out.push(ch[i]);
            }
        }
        out
    }

    pub fn channel(&self, k: usize) -> Channel {
        Channel {
            width: self.width,
            height: self.height,
            data: self.channels[k].clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Copies the `w×h` rectangle at `(x, y)`.
    pub fn crop(&self, r: Region) -> Result<RgbImage> {
        r.check_within(self.width, self.height)?;
        let channels = self.channels.clone().map(|plane| {
            let mut out = Vec::with_capacity(r.w * r.h);
            for row in r.y..r.y + r.h {
                let start = row * self.width + r.x;
                out.extend_from_slice(&plane[start..start + r.w]);
            }
            out
        });
        Ok(RgbImage {
            width: r.w,
            height: r.h,
            channels,
        })
    }
}

/// Rectangle `(x, y, w, h)` in pixel units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Region {
    pub fn whole(width: usize, height: usize) -> Self {
        Region {
            x: 0,
            y: 0,
            w: width,
            h: height,
        }
    }

    pub fn check_within(&self, width: usize, height: usize) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(invalid("region must be non-empty"));
        }
        let fits = self.x.checked_add(self.w).is_some_and(|e| e <= width)
            && self.y.checked_add(self.h).is_some_and(|e| e <= height);
        if !fits {
            return Err(invalid(format!(
                "region {},{},{},{} exceeds {width}x{height} image",
                self.x, self.y, self.w, self.h
            )));
        }
        Ok(())
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    /// `x,y,w,h`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| invalid(format!("region `{s}` is not x,y,w,h")))?;
        match parts[..] {
            [x, y, w, h] => Ok(Region { x, y, w, h }),
            _ => Err(invalid(format!("region `{s}` is not x,y,w,h"))),
        }
    }
}
