"""Regenerate the synthetic fixture images under fixtures/images/.

The mock backends only ever hash these files, so the pictures just need to
be small, stable, and visually suggestive of their scene for anyone opening
the folder. Run from the repository root:

    python3 scripts/make_fixture_images.py
"""

from pathlib import Path

from PIL import Image, ImageDraw

SIZE = (96, 96)

# scene -> (background, [(shape, color, box), ...]); boxes are in pixels.
SCENES = {
    "street_crowd": (
        (170, 180, 190),
        [
            ("rect", (90, 90, 100), (0, 64, 96, 96)),       # pavement
            ("rect", (200, 120, 90), (4, 10, 34, 60)),      # shop front
            ("rect", (120, 60, 40), (62, 12, 92, 60)),      # shop front
            ("ellipse", (40, 40, 60), (40, 58, 50, 78)),    # pedestrians
            ("ellipse", (60, 40, 40), (52, 60, 62, 80)),
            ("ellipse", (40, 60, 40), (30, 62, 40, 82)),
        ],
    ),
    "subway_entrance": (
        (150, 160, 170),
        [
            ("rect", (30, 120, 60), (20, 8, 76, 26)),       # green sign
            ("rect", (50, 50, 55), (28, 26, 68, 90)),       # stairwell down
            ("rect", (25, 25, 30), (34, 34, 62, 90)),
        ],
    ),
    "subway_gates": (
        (200, 200, 205),
        [
            ("rect", (120, 120, 130), (6, 40, 26, 92)),     # turnstiles
            ("rect", (120, 120, 130), (38, 40, 58, 92)),
            ("rect", (120, 120, 130), (70, 40, 90, 92)),
            ("rect", (230, 140, 30), (6, 30, 90, 38)),      # fare banner
        ],
    ),
    "subway_stairs": (
        (140, 140, 145),
        [
            ("rect", (170, 170, 175), (24, 78, 72, 90)),    # steps, narrowing up
            ("rect", (160, 160, 165), (28, 64, 68, 76)),
            ("rect", (150, 150, 155), (32, 50, 64, 62)),
            ("rect", (140, 140, 148), (36, 36, 60, 48)),
            ("rect", (90, 70, 50), (18, 20, 22, 92)),       # handrail
        ],
    ),
    "giraffe_field": (
        (140, 200, 150),
        [
            ("rect", (90, 160, 90), (0, 70, 96, 96)),       # grass
            ("ellipse", (60, 120, 60), (4, 6, 56, 50)),     # tree canopy
            ("rect", (110, 80, 40), (26, 40, 34, 78)),      # trunk
            ("rect", (220, 180, 90), (58, 30, 70, 82)),     # giraffe body+neck
            ("ellipse", (220, 180, 90), (64, 20, 78, 32)),  # head
        ],
    ),
    "sheep_hill": (
        (150, 205, 160),
        [
            ("rect", (100, 170, 100), (0, 56, 96, 96)),     # hillside
            ("rect", (130, 100, 60), (60, 50, 92, 56)),     # fence rail
            ("ellipse", (240, 240, 240), (64, 60, 88, 76)), # sheep
            ("ellipse", (60, 60, 60), (84, 62, 92, 70)),    # head
        ],
    ),
    "crossing_red_light": (
        (130, 140, 150),
        [
            ("rect", (80, 80, 90), (0, 60, 96, 96)),        # road
            ("rect", (230, 230, 230), (10, 70, 86, 76)),    # zebra stripes
            ("rect", (230, 230, 230), (10, 82, 86, 88)),
            ("rect", (40, 40, 45), (70, 10, 78, 60)),       # signal pole
            ("ellipse", (220, 40, 40), (66, 6, 82, 22)),    # red light
            ("rect", (70, 70, 90), (8, 40, 40, 58)),        # waiting car
        ],
    ),
    "train_platform": (
        (150, 150, 158),
        [
            ("rect", (110, 110, 120), (0, 70, 96, 96)),     # platform
            ("rect", (240, 210, 60), (0, 66, 96, 70)),      # safety line
            ("rect", (80, 90, 120), (8, 22, 88, 62)),       # train body
            ("rect", (200, 220, 235), (14, 30, 30, 44)),    # windows
            ("rect", (200, 220, 235), (38, 30, 54, 44)),
            ("rect", (200, 220, 235), (62, 30, 78, 44)),
        ],
    ),
    "market_street": (
        (185, 175, 160),
        [
            ("rect", (120, 110, 95), (0, 62, 96, 96)),      # walkway
            ("rect", (210, 90, 70), (4, 26, 40, 60)),       # stall awnings
            ("rect", (90, 140, 80), (56, 26, 92, 60)),
            ("ellipse", (220, 170, 60), (10, 50, 20, 60)),  # fruit crates
            ("ellipse", (200, 80, 60), (24, 52, 34, 62)),
            ("ellipse", (50, 50, 70), (44, 56, 54, 76)),    # shopper
        ],
    ),
    "living_room": (
        (215, 205, 190),
        [
            ("rect", (150, 150, 160), (6, 48, 60, 84)),     # sofa
            ("rect", (130, 100, 70), (66, 60, 92, 84)),     # low table
            ("rect", (240, 220, 150), (72, 36, 86, 60)),    # lamp
            ("ellipse", (90, 90, 95), (20, 44, 40, 56)),    # cat on cushion
        ],
    ),
}


def render(name: str, spec, out_dir: Path) -> Path:
    background, shapes = spec
    image = Image.new("RGB", SIZE, background)
    draw = ImageDraw.Draw(image)
    for shape, color, box in shapes:
        if shape == "rect":
            draw.rectangle(box, fill=color)
        else:
            draw.ellipse(box, fill=color)
    path = out_dir / f"{name}.jpg"
    image.save(path, "JPEG", quality=85)
    return path


def main() -> None:
    out_dir = Path(__file__).resolve().parent.parent / "fixtures" / "images"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, spec in SCENES.items():
        path = render(name, spec, out_dir)
        print(f"wrote {path} ({path.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
