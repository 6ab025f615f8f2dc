// Navigation helpers over the content tree payload. A tutorial can be
// linked into extra courses via course_links, so the same lecture may
// appear under several courses in the catalog.
import type { TreeNode } from "./api.js";

export interface LectureRef {
  id: string;
  title: string;
  tutorialId: string;
  tutorialTitle: string;
  courseId: string;
  courseTitle: string;
  departmentId: string;
  departmentTitle: string;
}

interface CourseSite {
  course: TreeNode;
  department: TreeNode;
}

export function lectureCatalog(tree: TreeNode[]): LectureRef[] {
  const courseSites = new Map<string, CourseSite>();
  for (const department of tree) {
    for (const course of department.children) {
      if (course.kind === "course") {
        courseSites.set(course.id, { course, department });
      }
    }
  }

  const refs: LectureRef[] = [];
  const addTutorial = (tutorial: TreeNode, site: CourseSite) => {
    for (const lecture of tutorial.children) {
      if (lecture.kind !== "lecture") continue;
      refs.push({
        id: lecture.id,
        title: lecture.title,
        tutorialId: tutorial.id,
        tutorialTitle: tutorial.title,
        courseId: site.course.id,
        courseTitle: site.course.title,
        departmentId: site.department.id,
        departmentTitle: site.department.title,
      });
    }
  };

  for (const department of tree) {
    for (const course of department.children) {
      if (course.kind !== "course") continue;
      for (const tutorial of course.children) {
        if (tutorial.kind !== "tutorial") continue;
        addTutorial(tutorial, { course, department });
        for (const extra of tutorial.course_links ?? []) {
          const site = courseSites.get(extra);
          if (site) addTutorial(tutorial, site);
        }
      }
    }
  }
  return refs;
}

// Slides arrive already ordered; this finds them for a lecture anywhere
// in the tree.
export function slidesOf(tree: TreeNode[], lectureId: string): TreeNode[] {
  const stack = [...tree];
  while (stack.length > 0) {
    const node = stack.pop()!;
    if (node.kind === "lecture" && node.id === lectureId) {
      return node.children.filter((c) => c.kind === "slide");
    }
    stack.push(...node.children);
  }
  return [];
}
