"""Tests for box arithmetic, projection and quad clipping."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from src.models.errors import InvalidBox
from src.models.geometry import BBox, Billboard, CameraPose
from src.services.geometry import (
    NEAR_PLANE, billboard_axes, billboard_corners, camera_from_fov, clip_near, fully_in_frame, iou,
    look_at_pitch, look_at_yaw, project_billboard, project_point, world_to_camera
)

from tests.builders import camera


def near_crossings(lines: np.ndarray) -> np.ndarray:
    """Points where straight grid lines (rows of a (lines, n, 3) camera-frame grid) cross the near plane."""
    start, end = lines[:, 0], lines[:, -1]
    crossing = (start[:, 2] - NEAR_PLANE) * (end[:, 2] - NEAR_PLANE) < 0
    start, end = start[crossing], end[crossing]
    fraction = (NEAR_PLANE - start[:, 2]) / (end[:, 2] - start[:, 2])
    points = start + fraction[:, None] * (end - start)
    points[:, 2] = NEAR_PLANE
    return points


def dense_oracle(cam: CameraPose, plane: Billboard, samples: int = 100):
    """Bounding rectangle of densely sampled quad points, projected one by one and clipped.

    Grid lines that cross the near plane also contribute their crossing point.
    """
    c0, c1, c2, c3 = world_to_camera(cam, billboard_corners(cam, plane))
    s, t = np.meshgrid(np.linspace(0.0, 1.0, samples), np.linspace(0.0, 1.0, samples))
    s, t = s[..., None], t[..., None]
    # Bilinear weights reproduce the corners exactly on the grid border
    grid = (1 - s) * (1 - t) * c0 + s * (1 - t) * c1 + s * t * c2 + (1 - s) * t * c3
    cam_points = np.concatenate([
        grid.reshape(-1, 3),
        near_crossings(grid),
        near_crossings(grid.transpose(1, 0, 2))
    ])
    cam_points = cam_points[cam_points[:, 2] >= NEAR_PLANE]
    if len(cam_points) == 0:
        return None
    cx, cy = cam.principal_point
    us = cam.focal * cam_points[:, 0] / cam_points[:, 2] + cx
    vs = cam.focal * cam_points[:, 1] / cam_points[:, 2] + cy
    width, height = cam.image_size
    x0, y0 = max(us.min(), 0.0), max(vs.min(), 0.0)
    x1, y1 = min(us.max(), width), min(vs.max(), height)
    if x1 <= x0 or y1 <= y0:
        return None
    return x0, y0, x1, y1


class TestBBox:
    """Test cases for BBox construction and corner conversion."""

    def test_degenerate_box_is_rejected(self):
        """Zero or negative extent raises InvalidBox."""
        with pytest.raises(InvalidBox):
            BBox(0.0, 0.0, 0.0, 1.0)
        with pytest.raises(InvalidBox):
            BBox(0.0, 0.0, 1.0, -2.0)

    def test_corner_round_trip(self):
        """Corner form converts back to the same box."""
        box = BBox(cx=50.0, cy=40.0, w=10.0, h=6.0)
        assert box.to_corners() == (45.0, 37.0, 55.0, 43.0)
        assert BBox.from_corners(*box.to_corners()) == box

    def test_contains_and_clip(self):
        """Containment honours tolerance; clipping intersects with the image."""
        outer = BBox.from_corners(0, 0, 10, 10)
        inner = BBox.from_corners(2, 2, 8, 8)
        assert outer.contains(inner)
        assert not inner.contains(outer)
        assert outer.contains(BBox.from_corners(0, 0, 10.0000001, 10), tolerance=1e-6)

        clipped = BBox.from_corners(-5, -5, 5, 5).clip(4, 4)
        assert clipped.to_corners() == (0.0, 0.0, 4.0, 4.0)
        assert BBox.from_corners(10, 10, 12, 12).clip(4, 4) is None


class TestIoU:
    """Test cases for intersection over union."""

    def test_identical_boxes(self):
        """Identical boxes have IoU 1."""
        box = BBox(5.0, 5.0, 4.0, 2.0)
        assert iou(box, box) == 1.0

    def test_disjoint_boxes(self):
        """Disjoint boxes have IoU 0."""
        assert iou(BBox(0, 0, 2, 2), BBox(10, 10, 2, 2)) == 0.0

    def test_partial_overlap_is_one_seventh(self):
        """Unit overlap of two 2x2 boxes gives 1/7."""
        assert iou(BBox(1, 1, 2, 2), BBox(2, 2, 2, 2)) == pytest.approx(1.0 / 7.0, abs=1e-12)

    def test_partial_overlap_matches_pixel_grid(self):
        """The 1/7 case agrees with counting cells on a fine grid."""
        scale = 100
        grid_a = np.zeros((4 * scale, 4 * scale), dtype=bool)
        grid_b = np.zeros_like(grid_a)
        grid_a[0:2 * scale, 0:2 * scale] = True
        grid_b[1 * scale:3 * scale, 1 * scale:3 * scale] = True
        grid_iou = (grid_a & grid_b).sum() / (grid_a | grid_b).sum()
        assert iou(BBox(1, 1, 2, 2), BBox(2, 2, 2, 2)) == pytest.approx(grid_iou, abs=1e-12)


class TestProjection:
    """Test cases for point and billboard projection."""

    def setup_method(self):
        """Set up test fixtures."""
        self.camera = camera()

    def test_point_on_optical_axis(self):
        """A point on the optical axis lands on the principal point."""
        assert project_point(self.camera, (0, 0, 10)) == pytest.approx((500.0, 500.0))

    def test_point_by_similar_triangles(self):
        """(1, 1, 10) lands 50 px right and down of the centre."""
        assert project_point(self.camera, (1, 1, 10)) == pytest.approx((550.0, 550.0))

    def test_point_behind_camera(self):
        """Points behind the camera have no projection."""
        assert project_point(self.camera, (0, 0, -5)) is None

    def test_on_axis_quad_closed_form(self):
        """A 2x2 camera-facing quad at depth 10 projects to a 100 px square."""
        box = project_billboard(self.camera, Billboard.facing_camera((0, 0, 10), 2, 2))
        assert box.cx == pytest.approx(500.0, abs=1e-6)
        assert box.cy == pytest.approx(500.0, abs=1e-6)
        assert box.w == pytest.approx(100.0, abs=1e-6)
        assert box.h == pytest.approx(100.0, abs=1e-6)

    def test_border_clip(self):
        """A fixed quad straddling the right border is clipped to the image."""
        plane = Billboard.fixed((10, 0, 10), 2, 2, (0, 0, -1))
        box = project_billboard(self.camera, plane)
        assert box.cx == pytest.approx(975.0, abs=1e-6)
        assert box.cy == pytest.approx(500.0, abs=1e-6)
        assert box.w == pytest.approx(50.0, abs=1e-6)
        assert box.h == pytest.approx(100.0, abs=1e-6)

    def test_edge_on_quad_is_absent(self):
        """A quad whose normal is perpendicular to the view axis has no area."""
        plane = Billboard.fixed((0, 0, 10), 2, 2, (1, 0, 0))
        assert project_billboard(self.camera, plane) is None

    def test_quad_behind_camera_is_absent(self):
        """A quad entirely behind the near plane has no box."""
        plane = Billboard.fixed((0, 0, -10), 2, 2, (0, 0, -1))
        assert project_billboard(self.camera, plane) is None

    def test_quad_straddling_camera_plane(self):
        """A quad crossing z = 0 keeps only its in-front part and stays inside the image."""
        plane = Billboard.fixed((0.5, 0, 0.5), 2, 2, (1, 0, 0))
        box = project_billboard(self.camera, plane)
        assert box is not None
        assert box.within_image(1000, 1000)

    def test_texture_axes_follow_image_axes(self):
        """With normal -z, texture columns run along +x and rows along +y."""
        u_axis, v_axis = billboard_axes(np.array([0.0, 0.0, -1.0]))
        assert u_axis == pytest.approx([1.0, 0.0, 0.0])
        assert v_axis == pytest.approx([0.0, 1.0, 0.0])

    def test_clip_near_keeps_front_polygon(self):
        """A polygon fully in front is returned unchanged."""
        polygon = np.array([[0, 0, 1.0], [1, 0, 1.0], [1, 1, 2.0]])
        assert np.array_equal(clip_near(polygon), polygon)

    def test_clip_near_drops_back_polygon(self):
        """A polygon fully behind the near plane clips to nothing."""
        polygon = np.array([[0, 0, -1.0], [1, 0, -1.0], [1, 1, -2.0]])
        assert clip_near(polygon).shape == (0, 3)

    def test_fully_in_frame(self):
        """Full visibility requires every corner in the image."""
        assert fully_in_frame(self.camera, Billboard.facing_camera((0, 0, 10), 2, 2))
        assert not fully_in_frame(self.camera, Billboard.fixed((10, 0, 10), 2, 2, (0, 0, -1)))


class TestCameraHelpers:
    """Test cases for camera construction and look-at angles."""

    def test_focal_from_vertical_fov(self):
        """focal = (H / 2) / tan(fov / 2) with a centred principal point."""
        cam = camera_from_fov((0, 0, 0), 0.0, 0.0, math.radians(90.0), (640, 480))
        assert cam.focal == pytest.approx(240.0)
        assert cam.principal_point == (320.0, 240.0)

    def test_look_at_yaw_turns_toward_target(self):
        """A target on +x is reached by yaw = pi / 2; straight ahead by 0."""
        assert look_at_yaw((0, 0, 0), (5, 0, 0)) == pytest.approx(math.pi / 2)
        assert look_at_yaw((0, 0, 0), (0, 3, 5)) == pytest.approx(0.0)

    def test_look_at_pitch_raises_toward_higher_target(self):
        """A target above (negative y) needs positive pitch."""
        assert look_at_pitch((0, 0, 0), (0, -1, 1)) == pytest.approx(math.pi / 4)

    def test_yawed_camera_sees_target_centred(self):
        """After looking at a target it projects onto the principal point."""
        target = (4.0, 0.0, 3.0)
        yaw = look_at_yaw((0, 0, 0), target)
        cam = camera(yaw=yaw)
        assert project_point(cam, target) == pytest.approx((500.0, 500.0))


@pytest.mark.property
class TestGeometryProperties:
    """Property-based tests for projection and IoU."""

    @given(
        ax=st.floats(-50, 50), ay=st.floats(-50, 50), aw=st.floats(0.5, 40), ah=st.floats(0.5, 40),
        bx=st.floats(-50, 50), by=st.floats(-50, 50), bw=st.floats(0.5, 40), bh=st.floats(0.5, 40)
    )
    @settings(max_examples=200, deadline=2000)
    def test_property_iou_bounds_and_symmetry(self, ax, ay, aw, ah, bx, by, bw, bh):
        """
        **Property: IoU is symmetric and bounded by the area ratio**
        """
        a, b = BBox(ax, ay, aw, ah), BBox(bx, by, bw, bh)
        value = iou(a, b)
        assert value == pytest.approx(iou(b, a), abs=1e-12)
        assert 0.0 <= value <= 1.0
        ratio = min(a.area, b.area) / max(a.area, b.area)
        assert value <= ratio + 1e-9

    @given(
        x=st.floats(-3, 3), y=st.floats(-2, 2), z=st.floats(0.5, 20),
        width=st.floats(0.2, 4), height=st.floats(0.2, 4),
        yaw=st.floats(-0.6, 0.6), pitch=st.floats(-0.3, 0.3),
        facing=st.booleans()
    )
    @settings(max_examples=1000, deadline=5000)
    def test_property_box_matches_dense_sampling(self, x, y, z, width, height, yaw, pitch, facing):
        """
        **Property: for quads in front of the camera the box matches the dense-sampling oracle within 0.5 px**
        """
        cam = camera(focal=400.0, size=(640, 480), yaw=yaw, pitch=pitch)
        if facing:
            plane = Billboard.facing_camera((x, y, z), width, height)
        else:
            plane = Billboard.fixed((x, y, z), width, height, (0.0, 0.0, -1.0))
        assume(world_to_camera(cam, billboard_corners(cam, plane))[:, 2].min() >= 0.1)

        box = project_billboard(cam, plane)
        oracle = dense_oracle(cam, plane)
        if box is None or oracle is None:
            # Either both vanish or the survivor is a sliver along the image border
            survivor = box.to_corners() if box is not None else oracle
            if survivor is not None:
                x0, y0, x1, y1 = survivor
                assert min(x1 - x0, y1 - y0) <= 1.0
            return

        for edge, expected in zip(box.to_corners(), oracle):
            assert abs(edge - expected) <= 0.5

    @given(
        x=st.floats(-2, 2), y=st.floats(-2, 2), z=st.floats(-1, 1),
        width=st.floats(0.5, 4), height=st.floats(0.5, 4),
        normal=st.sampled_from([(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0)]),
        yaw=st.floats(-0.5, 0.5)
    )
    @settings(max_examples=1000, deadline=5000)
    def test_property_straddling_quad_matches_dense_sampling(self, x, y, z, width, height, normal, yaw):
        """
        **Property: for quads crossing the near plane the box matches the dense-sampling oracle within 0.5 px**
        """
        cam = camera(yaw=yaw)
        plane = Billboard.fixed((x, y, z), width, height, normal)
        box = project_billboard(cam, plane)
        oracle = dense_oracle(cam, plane)
        if box is None or oracle is None:
            survivor = box.to_corners() if box is not None else oracle
            if survivor is not None:
                x0, y0, x1, y1 = survivor
                assert min(x1 - x0, y1 - y0) <= 1.0
            return

        assert box.contains(BBox.from_corners(*oracle), tolerance=1e-6)
        for edge, expected in zip(box.to_corners(), oracle):
            assert abs(edge - expected) <= 0.5

    @given(
        x=st.floats(-30, 30), y=st.floats(-20, 20), z=st.floats(-5, 20),
        width=st.floats(0.2, 10), height=st.floats(0.2, 10)
    )
    @settings(max_examples=200, deadline=2000)
    def test_property_clipped_box_inside_image(self, x, y, z, width, height):
        """
        **Property: clipped boxes never leave the image rectangle**
        """
        cam = camera()
        box = project_billboard(cam, Billboard.fixed((x, y, z), width, height, (0.0, 0.0, -1.0)))
        if box is not None:
            assert box.within_image(1000, 1000)
