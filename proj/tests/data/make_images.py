"""Regenerates the bundled 128x128 test images from scikit-image sample data."""
from pathlib import Path

import numpy as np
from PIL import Image
from skimage import data

OUT = Path(__file__).resolve().parent
SIZE = 128


def area_resize(pixels, size):
    return np.asarray(Image.fromarray(pixels).resize((size, size), Image.Resampling.BOX))


def main():
    Image.fromarray(area_resize(data.camera(), SIZE)).save(OUT / "camera.png")
    Image.fromarray(area_resize(data.astronaut(), SIZE)).save(OUT / "astronaut.png")
    text = data.text()[20:148, 40:296]
    Image.fromarray(np.asarray(Image.fromarray(text).resize((SIZE, SIZE // 2 * 2), Image.Resampling.BOX))).save(
        OUT / "text.png")


if __name__ == "__main__":
    main()
